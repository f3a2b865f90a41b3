#pragma once

#include <functional>
#include <vector>

namespace qdsim {

struct LevMarOptions {
    int max_iterations = 200;
    double rel_step_tol = 1e-9;
    double lambda0 = 1e-3;
};

struct LevMarResult {
    std::vector<double> params;
    double cost = 0.0;  // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

using ResidualFn = std::function<void(const std::vector<double>& params,
                                      std::vector<double>& residuals)>;

// Damped least squares with a trust-region-style lambda safeguard.
// Numeric forward-difference Jacobian; intended for a handful of params.
LevMarResult levmar_fit(const ResidualFn& fn, std::size_t n_residuals,
                        std::vector<double> p0, const LevMarOptions& opt = LevMarOptions{});

// Solves the dense system a x = b in place (partial pivoting).
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b);

}  // namespace qdsim

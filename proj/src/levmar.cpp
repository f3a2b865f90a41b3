#include "qdsim/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace qdsim {

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) throw std::runtime_error("singular normal matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

namespace {

double cost_of(const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return c;
}

}  // namespace

LevMarResult levmar_fit(const ResidualFn& fn, std::size_t n_residuals, std::vector<double> p0,
                        const LevMarOptions& opt) {
    const std::size_t np = p0.size();
    std::vector<double> r(n_residuals), r_trial(n_residuals), r_pert(n_residuals);

    fn(p0, r);
    double cost = cost_of(r);
    double lambda = opt.lambda0;

    LevMarResult out;
    out.params = p0;
    out.cost = cost;

    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
        out.iterations = iter;

        // forward-difference Jacobian
        std::vector<std::vector<double>> jac(np, std::vector<double>(n_residuals));
        for (std::size_t j = 0; j < np; ++j) {
            const double h = 1e-7 * std::max(std::fabs(out.params[j]), 1e-8);
            std::vector<double> p = out.params;
            p[j] += h;
            fn(p, r_pert);
            for (std::size_t i = 0; i < n_residuals; ++i)
                jac[j][i] = (r_pert[i] - r[i]) / h;
        }

        std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
        std::vector<double> jtr(np, 0.0);
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t b = a; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i) s += jac[a][i] * jac[b][i];
                jtj[a][b] = jtj[b][a] = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n_residuals; ++i) s += jac[a][i] * r[i];
            jtr[a] = -s;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            auto damped = jtj;
            for (std::size_t d = 0; d < np; ++d)
                damped[d][d] += lambda * std::max(jtj[d][d], 1e-12);
            std::vector<double> step;
            try {
                step = solve_dense(damped, jtr);
            } catch (const std::runtime_error&) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> p_trial = out.params;
            double rel_step = 0.0;
            for (std::size_t j = 0; j < np; ++j) {
                p_trial[j] += step[j];
                rel_step = std::max(rel_step,
                                    std::fabs(step[j]) / std::max(std::fabs(p_trial[j]), 1e-12));
            }
            fn(p_trial, r_trial);
            const double trial_cost = cost_of(r_trial);
            if (trial_cost <= cost) {
                out.params = p_trial;
                r = r_trial;
                cost = trial_cost;
                out.cost = cost;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_step < opt.rel_step_tol) {
                    out.converged = true;
                    return out;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // step rejected repeatedly: stationary to working precision
            out.converged = true;
            return out;
        }
    }
    return out;  // converged == false: iteration budget exhausted
}

}  // namespace qdsim

#pragma once

#include <stdexcept>
#include <vector>

#include "qdsim/detection.hpp"

namespace qdsim {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct G2Fit {
    double g2_zero = 0.0;
    double background_level = 0.0;  // counts per bin
    double peak_amplitude = 0.0;
    double lifetime_used_ns = 0.0;  // fixed input from the TRPL fit
    double residual_norm = 0.0;     // sqrt(weighted SSR / dof)
    int iterations = 0;
    bool converged = false;
};

struct TrplFit {
    double lifetime_ns = 0.0;
    double amplitude = 0.0;
    double background = 0.0;  // counts per bin
    double rise_time_ns = 0.0;  // 0 when not fitted
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Integrated zero-delay peak relative to the mean side peak.
// Side-peak centers at k * rep_period, k != 0; windows of +-halfwidth.
double g2_integrated(const Histogram& hist, double rep_period_ps,
                     double integration_halfwidth_ps);

// Default integration half-width used by the pipeline.
double default_g2_halfwidth_ps(double lifetime_ns, double rep_period_ps, double jitter_fwhm_ps);

// Damped least-squares fit of A exp(-t/tau) + B over the post-peak region,
// initialized from a log-linear regression of the tail.
TrplFit fit_trpl(const Histogram& hist, bool with_rise = false);

// Fits B + A sum_k c_k exp(-|tau - k T|/lifetime) with c_k = 1 for k != 0
// and c_0 = g2_zero free. With the lifetime fixed the model is linear in
// (A, A*g2, B) and the weighted subproblem is solved exactly.
G2Fit fit_g2(const Histogram& hist, double lifetime_ns, double rep_period_ps);

// Profile of the weighted residual when the lifetime is floated: for each
// tau in the grid the remaining linear parameters are solved exactly.
// Demonstrates the tau-background degeneracy the TRPL constraint removes.
struct G2ProfilePoint {
    double lifetime_ns = 0.0;
    double residual_norm = 0.0;
    double g2_zero = 0.0;
    double background_level = 0.0;
};
std::vector<G2ProfilePoint> fit_g2_profile(const Histogram& hist, double rep_period_ps,
                                           const std::vector<double>& lifetimes_ns);

}  // namespace qdsim

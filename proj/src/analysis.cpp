#include "qdsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdsim/levmar.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

namespace {

double window_of(const Histogram& h) { return -h.origin_ps; }

// Sum of counts in bins whose center lies within +-hw of center.
std::uint64_t window_sum(const Histogram& h, double center, double hw) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        if (std::fabs(h.bin_center(i) - center) <= hw) s += h.counts[i];
    return s;
}

}  // namespace

double g2_integrated(const Histogram& hist, double rep_period_ps,
                     double integration_halfwidth_ps) {
    if (hist.kind != HistKind::Coincidence)
        throw std::invalid_argument("coincidence histogram required");
    if (!(rep_period_ps > 0.0)) throw std::invalid_argument("rep_period must be > 0");
    if (!(integration_halfwidth_ps > 0.0 && integration_halfwidth_ps < 0.5 * rep_period_ps))
        throw std::invalid_argument("integration halfwidth must lie in (0, rep_period/2)");

    const double window = window_of(hist);
    int k_max = 0;
    while ((k_max + 1) * rep_period_ps + integration_halfwidth_ps <= window) ++k_max;
    if (k_max < 5)
        throw std::invalid_argument("histogram must span at least 5 side peaks per side");

    double side_sum = 0.0;
    int n_side = 0;
    for (int k = -k_max; k <= k_max; ++k) {
        if (k == 0) continue;
        const std::uint64_t s =
            window_sum(hist, k * rep_period_ps, integration_halfwidth_ps);
        if (s == 0) throw FitError("empty side-peak window at k=" + std::to_string(k));
        side_sum += static_cast<double>(s);
        ++n_side;
    }
    const double zero = static_cast<double>(window_sum(hist, 0.0, integration_halfwidth_ps));
    return zero / (side_sum / n_side);
}

double default_g2_halfwidth_ps(double lifetime_ns, double rep_period_ps, double jitter_fwhm_ps) {
    return std::min(5.0 * lifetime_ns * ps_per_ns, 0.5 * rep_period_ps - 3.0 * jitter_fwhm_ps);
}

TrplFit fit_trpl(const Histogram& hist, bool with_rise) {
    if (hist.kind != HistKind::Decay) throw std::invalid_argument("decay histogram required");
    if (hist.counts.size() < 50)
        throw std::invalid_argument("decay histogram must have at least 50 bins");

    const std::size_t peak =
        std::max_element(hist.counts.begin(), hist.counts.end()) - hist.counts.begin();
    const double t_peak = hist.bin_center(peak);

    std::vector<double> post_t, post_c;
    for (std::size_t i = peak; i < hist.counts.size(); ++i) {
        post_t.push_back(hist.bin_center(i) - t_peak);
        post_c.push_back(static_cast<double>(hist.counts[i]));
    }

    // background guess: mean of the lowest decile of post-peak bins
    std::vector<double> sorted_c = post_c;
    std::sort(sorted_c.begin(), sorted_c.end());
    const std::size_t n_low = std::max<std::size_t>(1, sorted_c.size() / 10);
    double b0 = std::accumulate(sorted_c.begin(), sorted_c.begin() + n_low, 0.0) / n_low;

    // log-linear regression of the tail above background
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    const double floor_c = std::max(2.0, 3.0 * std::sqrt(b0 + 1.0));
    for (std::size_t i = 0; i < post_t.size(); ++i) {
        const double excess = post_c[i] - b0;
        if (excess < floor_c) continue;
        const double y = std::log(excess);
        sx += post_t[i];
        sy += y;
        sxx += post_t[i] * post_t[i];
        sxy += post_t[i] * y;
        ++n;
    }
    if (n < 5) throw FitError("no decay present: too few bins above background");
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    if (!(slope < -1e-12)) throw FitError("no decay present: non-negative tail slope");
    const double tau0_ps = -1.0 / slope;
    const double a0 = std::exp((sy - slope * sx) / n);

    std::vector<double> fit_t = post_t, fit_c = post_c;
    std::vector<double> p0 = {a0, tau0_ps / ps_per_ns, b0};
    if (with_rise) {
        fit_t.clear();
        fit_c.clear();
        for (std::size_t i = 0; i < hist.counts.size(); ++i) {
            fit_t.push_back(hist.bin_center(i) - hist.origin_ps);
            fit_c.push_back(static_cast<double>(hist.counts[i]));
        }
        p0.push_back(hist.bin_width_ps / ps_per_ns);  // rise-time start value
    }
    const double t_offset = with_rise ? t_peak - hist.origin_ps : 0.0;

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double a = p[0], tau_ps = p[1] * ps_per_ns, b = p[2];
        const double rise_ps = with_rise ? p[3] * ps_per_ns : 0.0;
        for (std::size_t i = 0; i < fit_t.size(); ++i) {
            double m;
            if (with_rise) {
                const double t = fit_t[i];
                const double decay = t > t_offset ? std::exp(-(t - t_offset) / tau_ps) : 1.0;
                const double rise = -std::expm1(-t / std::max(rise_ps, 1e-6));
                m = a * decay * rise + b;
            } else {
                m = a * std::exp(-fit_t[i] / tau_ps) + b;
            }
            r[i] = (m - fit_c[i]) / std::sqrt(std::max(fit_c[i], 1.0));
        }
    };

    LevMarResult res = levmar_fit(residuals, fit_t.size(), p0);
    if (res.params[2] < 0.0) {
        // constrain the background to zero and refit the remaining params
        auto pinned = [&](const std::vector<double>& p, std::vector<double>& r) {
            std::vector<double> full = {p[0], p[1], 0.0};
            if (with_rise) full.push_back(p[2]);
            residuals(full, r);
        };
        std::vector<double> q0 = {res.params[0], res.params[1]};
        if (with_rise) q0.push_back(res.params[3]);
        const LevMarResult pinned_res = levmar_fit(pinned, fit_t.size(), q0);
        res.params = {pinned_res.params[0], pinned_res.params[1], 0.0};
        if (with_rise) res.params.push_back(pinned_res.params[2]);
        res.cost = pinned_res.cost;
        res.iterations += pinned_res.iterations;
        res.converged = pinned_res.converged;
    }

    TrplFit out;
    out.amplitude = res.params[0];
    out.lifetime_ns = res.params[1];
    out.background = res.params[2];
    if (with_rise) out.rise_time_ns = res.params[3];
    out.residual_norm = std::sqrt(res.cost / std::max<std::size_t>(1, fit_t.size() - p0.size()));
    out.iterations = res.iterations;
    out.converged = res.converged;
    if (out.converged && !(out.amplitude > 0.0))
        throw FitError("rejected fit: non-positive amplitude");
    if (out.converged && !(out.lifetime_ns > 0.0))
        throw FitError("rejected fit: non-positive lifetime");
    return out;
}

namespace {

struct G2Templates {
    std::vector<double> s0, s1;  // zero-peak and side-peak-sum basis
};

G2Templates g2_templates(const Histogram& hist, double lifetime_ps, double rep_period_ps) {
    const double window = window_of(hist);
    const int k_span = static_cast<int>(std::ceil((window + 10.0 * lifetime_ps) / rep_period_ps));
    G2Templates t;
    t.s0.resize(hist.counts.size());
    t.s1.resize(hist.counts.size());
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double tau = hist.bin_center(i);
        t.s0[i] = std::exp(-std::fabs(tau) / lifetime_ps);
        double s = 0.0;
        for (int k = -k_span; k <= k_span; ++k) {
            if (k == 0) continue;
            s += std::exp(-std::fabs(tau - k * rep_period_ps) / lifetime_ps);
        }
        t.s1[i] = s;
    }
    return t;
}

struct LinearG2 {
    double a = 0.0, c = 0.0, b = 0.0;
    double residual_norm = 0.0;
};

// Exact weighted least squares in (A, A*g2, B); the nonlinear parameter
// (the lifetime) is handled outside. The background is constrained to be
// non-negative: when the unconstrained optimum has B < 0 the active-set
// solution pins B = 0 and re-solves the remaining 2x2 system.
LinearG2 solve_linear_g2(const Histogram& hist, const G2Templates& t) {
    std::vector<std::vector<double>> m(3, std::vector<double>(3, 0.0));
    std::vector<double> rhs(3, 0.0);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double w = 1.0 / std::max(static_cast<double>(hist.counts[i]), 1.0);
        const double basis[3] = {t.s1[i], t.s0[i], 1.0};
        const double y = static_cast<double>(hist.counts[i]);
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) m[a][b] += w * basis[a] * basis[b];
            rhs[a] += w * basis[a] * y;
        }
    }
    m[1][0] = m[0][1];
    m[2][0] = m[0][2];
    m[2][1] = m[1][2];
    std::vector<double> sol = solve_dense(m, rhs);
    if (sol[2] < 0.0) {
        const std::vector<std::vector<double>> m2 = {{m[0][0], m[0][1]}, {m[1][0], m[1][1]}};
        const std::vector<double> r2 = solve_dense(m2, {rhs[0], rhs[1]});
        sol = {r2[0], r2[1], 0.0};
    }

    LinearG2 out;
    out.a = sol[0];
    out.c = sol[1];
    out.b = sol[2];
    double ssr = 0.0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double w = 1.0 / std::max(static_cast<double>(hist.counts[i]), 1.0);
        const double model = out.a * t.s1[i] + out.c * t.s0[i] + out.b;
        const double r = model - static_cast<double>(hist.counts[i]);
        ssr += w * r * r;
    }
    out.residual_norm = std::sqrt(ssr / std::max<std::size_t>(1, hist.counts.size() - 3));
    return out;
}

void check_peak_spacing(const Histogram& hist, double rep_period_ps, int k_max) {
    std::vector<double> centers;
    for (int k = -k_max; k <= k_max; ++k) {
        const double c = k * rep_period_ps;
        std::size_t best = 0;
        std::uint64_t best_count = 0;
        bool found = false;
        for (std::size_t i = 0; i < hist.counts.size(); ++i) {
            if (std::fabs(hist.bin_center(i) - c) > 0.25 * rep_period_ps) continue;
            if (!found || hist.counts[i] > best_count) {
                best = i;
                best_count = hist.counts[i];
                found = true;
            }
        }
        if (found) centers.push_back(hist.bin_center(best));
    }
    if (centers.size() < 3) return;
    std::vector<double> diffs;
    for (std::size_t i = 1; i < centers.size(); ++i)
        diffs.push_back(centers[i] - centers[i - 1]);
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    const double med = diffs[diffs.size() / 2];
    if (std::fabs(med - rep_period_ps) / rep_period_ps > 0.05)
        throw FitError("rep_period inconsistent with observed peak spacing");
}

int side_peak_span(const Histogram& hist, double rep_period_ps) {
    const double window = window_of(hist);
    int k_max = 0;
    while ((k_max + 1) * rep_period_ps + 0.25 * rep_period_ps <= window) ++k_max;
    return k_max;
}

}  // namespace

G2Fit fit_g2(const Histogram& hist, double lifetime_ns, double rep_period_ps) {
    if (hist.kind != HistKind::Coincidence)
        throw std::invalid_argument("coincidence histogram required");
    if (!(lifetime_ns > 0.0)) throw std::invalid_argument("lifetime must be > 0");
    const int k_max = side_peak_span(hist, rep_period_ps);
    if (k_max < 5)
        throw std::invalid_argument("histogram must span at least 5 side peaks per side");
    check_peak_spacing(hist, rep_period_ps, k_max);

    const G2Templates t = g2_templates(hist, lifetime_ns * ps_per_ns, rep_period_ps);
    const LinearG2 lin = solve_linear_g2(hist, t);
    if (!(lin.a > 0.0)) throw FitError("rejected fit: non-positive peak amplitude");

    G2Fit out;
    out.g2_zero = std::max(0.0, lin.c / lin.a);
    out.background_level = lin.b;
    out.peak_amplitude = lin.a;
    out.lifetime_used_ns = lifetime_ns;
    out.residual_norm = lin.residual_norm;
    out.iterations = 1;  // the lifetime-fixed subproblem is linear and solved exactly
    out.converged = true;
    return out;
}

std::vector<G2ProfilePoint> fit_g2_profile(const Histogram& hist, double rep_period_ps,
                                           const std::vector<double>& lifetimes_ns) {
    std::vector<G2ProfilePoint> out;
    out.reserve(lifetimes_ns.size());
    for (double tau : lifetimes_ns) {
        const G2Templates t = g2_templates(hist, tau * ps_per_ns, rep_period_ps);
        const LinearG2 lin = solve_linear_g2(hist, t);
        G2ProfilePoint p;
        p.lifetime_ns = tau;
        p.residual_norm = lin.residual_norm;
        p.g2_zero = lin.a > 0.0 ? std::max(0.0, lin.c / lin.a) : 0.0;
        p.background_level = lin.b;
        out.push_back(p);
    }
    return out;
}

}  // namespace qdsim

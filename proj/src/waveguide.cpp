#include "qdsim/waveguide.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace qdsim {

void NanowireGeometry::validate() const {
    if (!(diameter_nm > 0.0)) throw std::invalid_argument("diameter must be > 0");
    if (!(n_core > n_clad) || !(n_clad >= 1.0))
        throw std::invalid_argument("need n_core > n_clad >= 1");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double bessel_j(int m, double x) { return std::cyl_bessel_j(m, x); }
double bessel_k(int m, double x) { return std::cyl_bessel_k(m, x); }

// w K1'(w)/K1(w); -> -1 as w -> 0.
double k1_log_deriv_scaled(double w) {
    if (w < 1e-280) return -1.0;
    const double k0 = bessel_k(0, w);
    const double k1 = bessel_k(1, w);
    // K1'(w) = -K0(w) - K1(w)/w
    return -w * k0 / k1 - 1.0;
}

struct CharParts {
    double lhs = 0.0;  // product of the two boundary brackets
    double rhs = 0.0;  // azimuthal coupling term
};

// Characteristic equation of the m=1 hybrid modes,
//   (n1^2 X + n2^2 Y)(X + Y) = neff^2 (1/u^2 + 1/w^2)^2,
// X = J1'(u)/(u J1(u)), Y = K1'(w)/(w K1(w)), rescaled by u^4 w^4 J1(u)^4
// so it stays finite at w -> 0 and has no K-side poles.
CharParts char_parts(const NanowireGeometry& g, double wavelength_nm, double s) {
    const double a = 0.5 * g.diameter_nm;
    const double k0 = 2.0 * kPi / wavelength_nm;
    const double nn = g.n_core * g.n_core - g.n_clad * g.n_clad;
    const double V = a * k0 * std::sqrt(nn);
    const double u = V * std::sqrt(1.0 - s);
    const double w = V * std::sqrt(s);
    const double neff2 = g.n_clad * g.n_clad + s * nn;

    const double j1 = bessel_j(1, u);
    const double j1p = bessel_j(0, u) - j1 / u;
    const double yt = k1_log_deriv_scaled(w);  // w K1'/K1

    const double t_core = u * w * w * j1p * j1;  // u^2 w^2 J1^2 * X
    const double t_clad = yt * u * u * j1 * j1;  // u^2 w^2 J1^2 * Y

    CharParts p;
    p.lhs = (g.n_core * g.n_core * t_core + g.n_clad * g.n_clad * t_clad) * (t_core + t_clad);
    p.rhs = neff2 * V * V * V * V * j1 * j1 * j1 * j1;
    return p;
}

double char_norm(const NanowireGeometry& g, double wavelength_nm, double s) {
    const CharParts p = char_parts(g, wavelength_nm, s);
    const double scale = std::max({std::fabs(p.lhs), std::fabs(p.rhs), 1e-300});
    return (p.lhs - p.rhs) / scale;
}

struct ModeInternals {
    double u = 0.0, w = 0.0, beta = 0.0, k0 = 0.0, a = 0.0;
    double a2 = 0.0;  // hz amplitude (eta0-scaled) relative to Ez amplitude 1
    double b1 = 0.0, b2 = 0.0;
};

ModeInternals mode_internals(const NanowireGeometry& g, double wavelength_nm, double s) {
    ModeInternals mi;
    mi.a = 0.5 * g.diameter_nm;
    mi.k0 = 2.0 * kPi / wavelength_nm;
    const double nn = g.n_core * g.n_core - g.n_clad * g.n_clad;
    const double V = mi.a * mi.k0 * std::sqrt(nn);
    mi.u = V * std::sqrt(1.0 - s);
    mi.w = V * std::sqrt(s);
    const double neff = std::sqrt(g.n_clad * g.n_clad + s * nn);
    mi.beta = neff * mi.k0;

    const double j1 = bessel_j(1, mi.u);
    const double k1 = bessel_k(1, mi.w);
    const double X = (bessel_j(0, mi.u) - j1 / mi.u) / (mi.u * j1);
    const double Y = (-bessel_k(0, mi.w) - k1 / mi.w) / (mi.w * k1);
    const double inv2 = 1.0 / (mi.u * mi.u) + 1.0 / (mi.w * mi.w);
    mi.a2 = -(mi.beta / mi.k0) * inv2 / (X + Y);
    mi.b1 = j1 / k1;
    mi.b2 = mi.a2 * j1 / k1;
    return mi;
}

// phi-integrated axial Poynting flux density at radius rho (arbitrary units).
double sz_radial(const ModeInternals& mi, const NanowireGeometry& g, double rho, bool core) {
    const double m = 1.0;
    const double gamma = core ? mi.u / mi.a : mi.w / mi.a;
    const double n2 = core ? g.n_core * g.n_core : g.n_clad * g.n_clad;
    const double cf = core ? 1.0 : mi.b1;
    const double cg = core ? mi.a2 : mi.b2;

    double f, fp, gg, gp;
    if (core) {
        const double j1 = bessel_j(1, gamma * rho);
        const double j1p = rho > 0 ? bessel_j(0, gamma * rho) - j1 / (gamma * rho)
                                   : 0.5;
        f = cf * j1;
        fp = cf * gamma * j1p;
        gg = cg * j1;
        gp = cg * gamma * j1p;
    } else {
        const double k1 = bessel_k(1, gamma * rho);
        const double k1p = -bessel_k(0, gamma * rho) - k1 / (gamma * rho);
        f = cf * k1;
        fp = cf * gamma * k1p;
        gg = cg * k1;
        gp = cg * gamma * k1p;
    }

    const double kb = mi.k0 / mi.beta;
    const double A = fp + kb * m * gg / rho;
    const double B = m * gg / rho + n2 * kb * fp;
    const double C = m * f / rho + kb * gp;
    const double D = gp + n2 * kb * m * f / rho;

    const double kap4 = gamma * gamma * gamma * gamma;
    return (mi.beta * mi.beta / kap4) * rho * (A * B + C * D);
}

struct PowerIntegrals {
    double core = 0.0, clad = 0.0;
    double core_sq = 0.0, clad_sq = 0.0;  // integral of Sz^2 * rho (for A_eff)
};

PowerIntegrals integrate_power(const ModeInternals& mi, const NanowireGeometry& g) {
    PowerIntegrals pi;
    // core: composite Simpson on [0, a]
    const int nc = 512;
    const double h = mi.a / nc;
    for (int i = 0; i <= nc; ++i) {
        const double rho = std::max(i * h, 1e-9 * mi.a);
        const double v = sz_radial(mi, g, rho, true);
        const double wgt = (i == 0 || i == nc) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        pi.core += wgt * v;
        pi.core_sq += wgt * v * v / rho;  // Sz^2 rho = (Sz rho)^2 / rho
    }
    pi.core *= h / 3.0;
    pi.core_sq *= h / 3.0;

    // cladding: substitute t = w rho / a; log-spaced for t < 1, linear above.
    const double t0 = mi.w;
    const double scale = mi.a / mi.w;
    std::vector<double> ts;
    const double t_knee = std::max(1.0, t0 * (1.0 + 1e-12));
    if (t0 < t_knee) {
        const int nlog = 400;
        for (int i = 0; i <= nlog; ++i)
            ts.push_back(t0 * std::pow(t_knee / t0, double(i) / nlog));
    } else {
        ts.push_back(t0);
    }
    const double t_end = t_knee + 40.0;
    const int nlin = 1200;
    for (int i = 1; i <= nlin; ++i) ts.push_back(t_knee + (t_end - t_knee) * double(i) / nlin);

    double prev_t = ts[0];
    double prev_v = sz_radial(mi, g, prev_t * scale, false);
    for (size_t i = 1; i < ts.size(); ++i) {
        const double t = ts[i];
        const double v = sz_radial(mi, g, t * scale, false);
        const double drho = (t - prev_t) * scale;
        pi.clad += 0.5 * (prev_v + v) * drho;
        pi.clad_sq += 0.5 * (prev_v * prev_v / (prev_t * scale) + v * v / (t * scale)) * drho;
        prev_t = t;
        prev_v = v;
    }
    return pi;
}

// Bisect a sign change of char_norm in s; log-space when the bracket hugs 0.
double refine_root(const NanowireGeometry& g, double wavelength_nm, double lo, double hi) {
    const bool logspace = hi < 1e-3;
    double flo = char_norm(g, wavelength_nm, lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = logspace ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = char_norm(g, wavelength_nm, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double he11_char(const NanowireGeometry& geom, double wavelength_nm, double s) {
    return char_norm(geom, wavelength_nm, s);
}

ModeSolution he11_neff(const NanowireGeometry& geom, double wavelength_nm) {
    geom.validate();
    if (!(wavelength_nm > 0.0)) throw std::invalid_argument("wavelength must be > 0");

    const double nn = geom.n_core * geom.n_core - geom.n_clad * geom.n_clad;
    const double V = kPi * geom.diameter_nm * std::sqrt(nn) / wavelength_nm;

    // Scan grid in s: linear over the bulk plus log-spaced points toward
    // s -> 0 so near-cutoff-free thin-wire roots still bracket.
    std::vector<double> grid;
    for (int i = 0; i <= 240; ++i)
        grid.push_back(std::pow(10.0, -240.0 + i));  // 1e-240 .. 1
    const int nlin = 4000;
    for (int i = 1; i < nlin; ++i) grid.push_back(double(i) / nlin);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    // stay off the exact endpoints
    while (!grid.empty() && grid.back() >= 1.0 - 1e-9) grid.pop_back();

    double best_s = -1.0;
    double prev_s = grid[0];
    double prev_f = char_norm(geom, wavelength_nm, prev_s);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double s = grid[i];
        const double f = char_norm(geom, wavelength_nm, s);
        if ((f < 0.0) != (prev_f < 0.0)) {
            const double root = refine_root(geom, wavelength_nm, prev_s, s);
            // reject pole crossings: residual must actually vanish
            if (std::fabs(char_norm(geom, wavelength_nm, root)) < 1e-6) best_s = root;
        }
        prev_s = s;
        prev_f = f;
    }
    if (best_s <= 0.0)
        throw ModeSolveError("no HE11 root bracketed for D=" + std::to_string(geom.diameter_nm) +
                             " nm, lambda=" + std::to_string(wavelength_nm) + " nm");

    ModeSolution sol;
    sol.n_eff = std::sqrt(geom.n_clad * geom.n_clad + best_s * nn);
    sol.v_number = V;
    sol.residual = std::fabs(char_norm(geom, wavelength_nm, best_s));

    const ModeInternals mi = mode_internals(geom, wavelength_nm, best_s);
    const PowerIntegrals pw = integrate_power(mi, geom);
    sol.confinement = pw.core / (pw.core + pw.clad);
    if (!(sol.confinement > 0.0 && sol.confinement < 1.0))
        throw ModeSolveError("mode power integrals out of range");
    return sol;
}

double he11_consistency(const NanowireGeometry& geom, double wavelength_nm) {
    const ModeSolution sol = he11_neff(geom, wavelength_nm);
    const double nn = geom.n_core * geom.n_core - geom.n_clad * geom.n_clad;
    const double s = (sol.n_eff * sol.n_eff - geom.n_clad * geom.n_clad) / nn;
    const ModeInternals mi = mode_internals(geom, wavelength_nm, s);

    // h_phi continuity, the boundary row not used to build the amplitudes.
    const double j1 = bessel_j(1, mi.u);
    const double j1p = bessel_j(0, mi.u) - j1 / mi.u;
    const double k1 = bessel_k(1, mi.w);
    const double k1p = -bessel_k(0, mi.w) - k1 / mi.w;
    const double kb = mi.k0 / mi.beta;
    const double a = mi.a;
    const double n1sq = geom.n_core * geom.n_core;
    const double n2sq = geom.n_clad * geom.n_clad;
    const double core =
        (a * a / (mi.u * mi.u)) * (mi.a2 * j1 / a + n1sq * kb * (mi.u / a) * j1p);
    const double clad =
        -(a * a / (mi.w * mi.w)) * (mi.b2 * k1 / a + n2sq * kb * (mi.w / a) * mi.b1 * k1p);
    return (core - clad) / std::max({std::fabs(core), std::fabs(clad), 1e-300});
}

namespace {

struct NormKey {
    double n_core, n_clad;
    bool operator<(const NormKey& o) const {
        return n_core != o.n_core ? n_core < o.n_core : n_clad < o.n_clad;
    }
};

double se_rate_raw(const NanowireGeometry& geom, double wavelength_nm) {
    const ModeSolution sol = he11_neff(geom, wavelength_nm);
    // group index by central difference
    const double dl = 1.0;
    const double np = he11_neff(geom, wavelength_nm + dl).n_eff;
    const double nm = he11_neff(geom, wavelength_nm - dl).n_eff;
    const double n_g = sol.n_eff - wavelength_nm * (np - nm) / (2.0 * dl);

    // effective-mode-area factor
    const double nn = geom.n_core * geom.n_core - geom.n_clad * geom.n_clad;
    const double s = (sol.n_eff * sol.n_eff - geom.n_clad * geom.n_clad) / nn;
    const ModeInternals mi = mode_internals(geom, wavelength_nm, s);
    const PowerIntegrals pw = integrate_power(mi, geom);
    const double total = pw.core + pw.clad;
    const double total_sq = pw.core_sq + pw.clad_sq;
    const double a_eff = total * total / total_sq;  // effective radial extent^2 proxy
    const double a_core = 0.5 * mi.a * mi.a;
    return sol.confinement * (n_g / geom.n_core) * (a_core / a_eff);
}

std::map<NormKey, double>& norm_cache() {
    static std::map<NormKey, double> cache;
    return cache;
}
std::mutex norm_mutex;

}  // namespace

double se_rate_relative(const NanowireGeometry& geom, double wavelength_nm) {
    double norm;
    {
        std::lock_guard<std::mutex> lock(norm_mutex);
        const NormKey key{geom.n_core, geom.n_clad};
        auto it = norm_cache().find(key);
        if (it == norm_cache().end()) {
            NanowireGeometry ref = geom;
            ref.diameter_nm = 310.0;
            double peak = 0.0;
            for (double lam = 1100.0; lam <= 1500.0; lam += 25.0)
                peak = std::max(peak, se_rate_raw(ref, lam));
            it = norm_cache().emplace(key, peak).first;
        }
        norm = it->second;
    }
    const double f = se_rate_raw(geom, wavelength_nm) / norm;
    if (!(f > 0.0)) throw ModeSolveError("non-positive relative emission rate");
    return f;
}

}  // namespace qdsim

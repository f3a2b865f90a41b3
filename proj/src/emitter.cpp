#include "qdsim/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdsim/random.hpp"
#include "qdsim/temperature.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

std::string to_string(Line line) {
    switch (line) {
        case Line::X: return "X";
        case Line::XX: return "XX";
        case Line::PShell: return "p";
    }
    return "?";
}

Line line_from_string(const std::string& s) {
    if (s == "X") return Line::X;
    if (s == "XX") return Line::XX;
    if (s == "p") return Line::PShell;
    throw std::invalid_argument("unknown transition label: " + s);
}

namespace {

void require_finite_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
        throw std::invalid_argument(std::string(name) + " must be finite and > 0");
}

}  // namespace

void EmitterConfig::validate() const {
    require_finite_positive(tau_x0_ns, "tau_x0");
    require_finite_positive(capture_rate_per_ns, "capture_rate");
    require_finite_positive(relax_rate_per_ns, "relax_rate");
    require_finite_positive(sp_splitting_meV, "sp_splitting");
    if (!std::isfinite(tau_xx_ratio) || tau_xx_ratio <= 0.0 || tau_xx_ratio > 1.0)
        throw std::invalid_argument("tau_xx_ratio must lie in (0, 1]");
    if (!std::isfinite(dark_splitting_meV) || dark_splitting_meV < 0.0)
        throw std::invalid_argument("dark_splitting must be >= 0");
    if (!std::isfinite(spin_flip_rate_per_ns) || spin_flip_rate_per_ns < 0.0)
        throw std::invalid_argument("spin_flip_rate must be >= 0");
    if (!std::isfinite(xx_binding_meV))
        throw std::invalid_argument("xx_binding must be finite");
    if (max_excitons < 1 || max_excitons > 2)
        throw std::invalid_argument("max_excitons must be 1 or 2");
    for (const auto& d : degeneracies)
        if (!std::isfinite(d.multiplicity) || d.multiplicity <= 0.0)
            throw std::invalid_argument("degeneracy multiplicities must be > 0");
}

double EmitterConfig::bright_multiplicity() const {
    for (const auto& d : degeneracies)
        if (d.level == "bright") return d.multiplicity;
    return 2.0;
}

double EmitterConfig::dark_multiplicity() const {
    for (const auto& d : degeneracies)
        if (d.level == "dark") return d.multiplicity;
    return 2.0;
}

void DriveConfig::validate() const {
    require_finite_positive(rep_rate_mhz, "rep_rate");
    require_finite_positive(mu_sat, "mu_sat");
    if (!std::isfinite(power_ratio) || power_ratio < 0.0)
        throw std::invalid_argument("power_ratio must be >= 0");
    if (n_pulses == 0)
        throw EmptySimulationError("empty simulation: n_pulses must be > 0");
    if (fixed_pairs && *fixed_pairs < 0)
        throw std::invalid_argument("fixed_pairs must be >= 0");
}

double saturation_map(double power_ratio, double mu_sat) {
    if (!std::isfinite(power_ratio) || power_ratio < 0.0)
        throw std::invalid_argument("power_ratio must be >= 0");
    return mu_sat * power_ratio;
}

namespace {

std::uint64_t digest_of(const std::ostringstream& oss) { return fnv1a(oss.str()); }

}  // namespace

std::uint64_t emitter_digest(const EmitterConfig& c) {
    std::ostringstream oss;
    oss.precision(17);
    oss << c.tau_x0_ns << '|' << c.tau_xx_ratio << '|' << c.capture_rate_per_ns << '|'
        << c.relax_rate_per_ns << '|' << c.dark_splitting_meV << '|' << c.sp_splitting_meV << '|'
        << c.spin_flip_rate_per_ns << '|' << c.xx_binding_meV << '|' << c.max_excitons;
    for (const auto& d : c.degeneracies) oss << '|' << d.level << ':' << d.multiplicity;
    return digest_of(oss);
}

std::uint64_t drive_digest(const DriveConfig& c) {
    std::ostringstream oss;
    oss.precision(17);
    oss << c.rep_rate_mhz << '|' << c.power_ratio << '|' << c.n_pulses << '|' << c.mu_sat;
    if (c.fixed_pairs) oss << "|fixed:" << *c.fixed_pairs;
    return digest_of(oss);
}

namespace {

// Dot state during the walk. Exciton count is capped at max_excitons;
// bright/dark is only meaningful for a single exciton.
struct DotState {
    int reservoir = 0;
    int hot = 0;  // captured but not yet relaxed
    int excitons = 0;
    bool dark = false;
};

}  // namespace

PhotonStream simulate_pulse_train(const EmitterConfig& emitter, const DriveConfig& drive,
                                  double temperature_K, const LifetimeFn& lifetime_model,
                                  std::uint64_t seed) {
    emitter.validate();
    drive.validate();
    if (!lifetime_model.fn) throw std::invalid_argument("lifetime model required");
    if (temperature_K < 4.0 || temperature_K > 300.0)
        throw std::invalid_argument("temperature must lie in [4, 300] K");

    const double tau_x_ns = lifetime_model(temperature_K);
    require_finite_positive(tau_x_ns, "lifetime_model(T)");
    const double rate_x = 1.0 / tau_x_ns;                           // per ns
    const double rate_xx = 1.0 / (tau_x_ns * emitter.tau_xx_ratio); // per ns

    const double lambda_x = emission_wavelength(temperature_K);
    const double e_x = energy_meV_from_wavelength(lambda_x);
    const double lambda_xx = wavelength_nm_from_energy(e_x - emitter.xx_binding_meV);

    const bool dark_enabled = emitter.spin_flip_rate_per_ns > 0.0;
    const double g_b = emitter.bright_multiplicity();
    const double g_d = emitter.dark_multiplicity();
    // Bright is the ground level; the dark level sits dark_splitting above it.
    // Detailed balance: bright:dark = (g_b/g_d) exp(+dE/kT).
    const double rate_db = emitter.spin_flip_rate_per_ns;  // downhill, dark -> bright
    const double rate_bd =
        rate_db * (g_d / g_b) *
        std::exp(-emitter.dark_splitting_meV / (kBoltzmann_meV * temperature_K));
    const double p_form_bright = dark_enabled ? g_b / (g_b + g_d) : 1.0;

    const double mu = saturation_map(drive.power_ratio, drive.mu_sat);
    const double period_ps = drive.rep_period_ps();

    Rng rng = make_rng(seed);
    std::poisson_distribution<int> inject(mu > 0.0 ? mu : 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    PhotonStream out;
    out.meta = {seed, emitter_digest(emitter), drive_digest(drive), temperature_K};

    DotState s;
    double t_ps = 0.0;
    const double t_end_ps = static_cast<double>(drive.n_pulses) * period_ps;
    std::uint64_t next_pulse = 0;

    while (true) {
        const double pulse_time =
            next_pulse < drive.n_pulses ? static_cast<double>(next_pulse) * period_ps
                                        : std::numeric_limits<double>::infinity();

        // Total transition rate in the current state, per ns.
        double r_capture = s.reservoir * emitter.capture_rate_per_ns;
        double r_relax = s.hot * emitter.relax_rate_per_ns;
        double r_emit = 0.0;
        double r_flip = 0.0;
        if (s.excitons == 2) {
            r_emit = rate_xx;
        } else if (s.excitons == 1) {
            if (!s.dark) r_emit = rate_x;
            if (dark_enabled) r_flip = s.dark ? rate_db : rate_bd;
        }
        const double total = r_capture + r_relax + r_emit + r_flip;

        double t_next = std::numeric_limits<double>::infinity();
        if (total > 0.0) t_next = t_ps + expo(rng) / total * ps_per_ns;

        if (pulse_time <= t_next) {
            if (next_pulse >= drive.n_pulses) break;
            t_ps = pulse_time;
            int n = drive.fixed_pairs ? *drive.fixed_pairs : (mu > 0.0 ? inject(rng) : 0);
            s.reservoir += n;
            ++next_pulse;
            continue;
        }
        if (!std::isfinite(t_next) || t_next >= t_end_ps) break;
        t_ps = t_next;

        double u = unif(rng) * total;
        if (u < r_capture) {
            --s.reservoir;
            ++s.hot;
        } else if (u < r_capture + r_relax) {
            --s.hot;
            if (s.excitons < emitter.max_excitons) {
                ++s.excitons;
                if (s.excitons == 1) s.dark = !(unif(rng) < p_form_bright);
                // two excitons: spin-paired, no dark flag
            }
            // dot full: pair lost non-radiatively
        } else if (u < r_capture + r_relax + r_emit) {
            if (s.excitons == 2) {
                out.records.push_back({t_ps, Line::XX, lambda_xx});
                s.excitons = 1;
                s.dark = false;  // cascade leaves a bright exciton
            } else {
                out.records.push_back({t_ps, Line::X, lambda_x});
                s.excitons = 0;
            }
        } else {
            s.dark = !s.dark;
        }
    }

    std::sort(out.records.begin(), out.records.end(),
              [](const PhotonRecord& a, const PhotonRecord& b) { return a.time_ps < b.time_ps; });
    return out;
}

}  // namespace qdsim

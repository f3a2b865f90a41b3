#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdsim {

enum class Line { X, XX, PShell };

std::string to_string(Line line);
Line line_from_string(const std::string& s);

// n_pulses == 0 is rejected separately from plain invalid-argument cases.
struct EmptySimulationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct LevelDegeneracy {
    std::string level;  // "bright", "dark", "p"
    double multiplicity = 0.0;
};

// The physical device under test: level structure and rates of the dot.
struct EmitterConfig {
    double tau_x0_ns = 2.1;          // exciton radiative lifetime at 4 K
    double tau_xx_ratio = 0.5;       // biexciton/exciton lifetime ratio, in (0,1]
    double capture_rate_per_ns = 200.0;  // reservoir carrier capture
    double relax_rate_per_ns = 200.0;    // intra-dot relaxation after capture
    double dark_splitting_meV = 0.3;     // dark level sits this far above bright ground
    double sp_splitting_meV = 68.0;
    double spin_flip_rate_per_ns = 0.0;  // bright<->dark mixing; 0 disables dark states
    double xx_binding_meV = 6.8;         // X - XX emission energy separation
    int max_excitons = 2;
    std::vector<LevelDegeneracy> degeneracies = {
        {"bright", 2.0}, {"dark", 2.0}, {"p", 4.0}};

    void validate() const;  // throws std::invalid_argument
    double bright_multiplicity() const;
    double dark_multiplicity() const;
};

struct DriveConfig {
    double rep_rate_mhz = 80.0;  // reference values: 80 and 20
    double power_ratio = 1.0;    // P / P_sat
    std::uint64_t n_pulses = 0;
    double mu_sat = 3.0;  // mean injected pairs at P = P_sat
    // Test hook: bypass Poisson injection with an exact per-pulse pair count.
    std::optional<int> fixed_pairs;

    void validate() const;
    double rep_period_ps() const { return 1e6 / rep_rate_mhz; }
};

struct PhotonRecord {
    double time_ps = 0.0;  // relative to experiment start
    Line line = Line::X;
    double wavelength_nm = 0.0;
};

struct StreamMeta {
    std::uint64_t seed = 0;
    std::uint64_t emitter_digest = 0;
    std::uint64_t drive_digest = 0;
    double temperature_K = 0.0;
};

struct PhotonStream {
    std::vector<PhotonRecord> records;  // sorted by time
    StreamMeta meta;
};

// Mean injected electron-hole pairs as a function of pump power.
// Linear in power; saturation of the detected X rate emerges from
// P(>=1 emission) = 1 - exp(-mu).
double saturation_map(double power_ratio, double mu_sat = 3.0);

// tau_X(T) in ns, supplied by the temperature-models module.
using LifetimeModel = double (*)(double temperature_K, const void* ctx);

struct LifetimeFn {
    double (*fn)(double, const void*) = nullptr;
    const void* ctx = nullptr;
    double operator()(double T) const { return fn(T, ctx); }
};

// Kinetic Monte Carlo over the pulsed-driven level system.
// Each pulse injects N ~ Poisson(mu) pairs into a reservoir; pairs are
// captured, relax into the dot, and the XX->X->ground cascade emits
// photons at the temperature-dependent radiative rates. The reservoir is
// not reset between pulses.
PhotonStream simulate_pulse_train(const EmitterConfig& emitter, const DriveConfig& drive,
                                  double temperature_K, const LifetimeFn& lifetime_model,
                                  std::uint64_t seed);

std::uint64_t emitter_digest(const EmitterConfig& c);
std::uint64_t drive_digest(const DriveConfig& c);

}  // namespace qdsim

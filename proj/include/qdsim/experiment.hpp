#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdsim/analysis.hpp"
#include "qdsim/config.hpp"
#include "qdsim/detection.hpp"
#include "qdsim/emitter.hpp"
#include "qdsim/temperature.hpp"
#include "qdsim/waveguide.hpp"

namespace qdsim {

// Full pipeline description: emitter + drive + detection + analysis knobs.
struct ExperimentConfig {
    EmitterConfig emitter;
    DriveConfig drive;
    DetectorConfig detector;
    NanowireGeometry geometry;
    LinewidthParams linewidth;
    LifetimeModelParams lifetime;  // calibrated from the geometry unless overridden

    double temperature_K = 4.0;
    double setup_throughput = 0.10;
    double filter_center_nm = 0.0;  // 0 = track the exciton line
    double filter_width_nm = 0.1;

    double g2_bin_width_ps = 100.0;
    int g2_side_peaks = 8;  // correlation window = this many rep periods
    double trpl_bin_width_ps = 50.0;

    std::vector<double> sweep_temperatures = {4, 40, 77, 120, 160, 220, 300};
    std::vector<double> sweep_powers = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0};

    std::uint64_t seed = 1;
};

// Builds from a parsed flat config (strict: leftover keys are errors).
ExperimentConfig load_experiment(const Config& cfg);

// Default configuration document generated from the in-code defaults, so
// the documented table cannot drift from the implementation.
std::string default_config_text();

double lifetime_at(const ExperimentConfig& cfg, double temperature_K);

struct PipelineResult {
    PhotonStream filtered;         // after bandpass + throughput loss
    ClickStream clicks0, clicks1;  // HBT arms
    Histogram coincidences;
    Histogram decay;
    TrplFit trpl_fit;
    G2Fit g2_fit;
    double g2_int = 0.0;          // integrated-peak estimator
    double model_lifetime_ns = 0.0;
    double detected_rate_mcps = 0.0;
    double duration_s = 0.0;
};

// simulate -> spectral filter -> throughput loss -> HBT -> histograms -> fits.
// Stage seeds derive from cfg.seed; identical (cfg, seed) gives identical output.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

struct SweepRow {
    double temperature_K = 0.0;
    double power_ratio = 0.0;
    double wavelength_nm = 0.0;
    double linewidth_uev = 0.0;
    double filter_width_nm = 0.0;
    double lifetime_ns = 0.0;   // fitted
    double g2_zero = 0.0;       // from the peak-model fit
    double g2_int = 0.0;
    double background = 0.0;    // counts per bin from the g2 fit
    double residual = 0.0;
    std::string error;          // non-empty when this point failed
};

// Measurement protocol for the temperature sweep: pump at 0.5 P_sat up to
// 120 K and 0.25 P_sat above; spectral filter 0.1 nm below 20 K, 12 nm up
// to 260 K, 25 nm beyond. Points run in parallel up to `jobs`; row order is
// the sweep order regardless of completion order.
std::vector<SweepRow> run_temperature_sweep(const ExperimentConfig& cfg, int jobs = 1);

struct PowerRow {
    double power_ratio = 0.0;
    double detected_rate_mcps = 0.0;
    double g2_zero = 0.0;
    double g2_int = 0.0;
    std::string error;
};

std::vector<PowerRow> run_power_sweep(const ExperimentConfig& cfg, int jobs = 1);

double sweep_power_for(double temperature_K);
double sweep_filter_width_for(double temperature_K);

}  // namespace qdsim

#include "qdsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "qdsim/random.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

ExperimentConfig load_experiment(const Config& cfg) {
    ExperimentConfig e;

    e.emitter.tau_x0_ns = cfg.get_double("emitter.tau_x0_ns", e.emitter.tau_x0_ns);
    e.emitter.tau_xx_ratio = cfg.get_double("emitter.tau_xx_ratio", e.emitter.tau_xx_ratio);
    e.emitter.capture_rate_per_ns =
        cfg.get_double("emitter.capture_rate_per_ns", e.emitter.capture_rate_per_ns);
    e.emitter.relax_rate_per_ns =
        cfg.get_double("emitter.relax_rate_per_ns", e.emitter.relax_rate_per_ns);
    e.emitter.dark_splitting_meV =
        cfg.get_double("emitter.dark_splitting_meV", e.emitter.dark_splitting_meV);
    e.emitter.sp_splitting_meV =
        cfg.get_double("emitter.sp_splitting_meV", e.emitter.sp_splitting_meV);
    e.emitter.spin_flip_rate_per_ns =
        cfg.get_double("emitter.spin_flip_rate_per_ns", e.emitter.spin_flip_rate_per_ns);
    e.emitter.xx_binding_meV =
        cfg.get_double("emitter.xx_binding_meV", e.emitter.xx_binding_meV);
    e.emitter.max_excitons = cfg.get_int("emitter.max_excitons", e.emitter.max_excitons);

    e.drive.rep_rate_mhz = cfg.get_double("drive.rep_rate_mhz", e.drive.rep_rate_mhz);
    e.drive.power_ratio = cfg.get_double("drive.power_ratio", e.drive.power_ratio);
    e.drive.n_pulses = static_cast<std::uint64_t>(
        cfg.get_double("drive.n_pulses", 8e6));
    e.drive.mu_sat = cfg.get_double("drive.mu_sat", e.drive.mu_sat);
    const int fixed = cfg.get_int("drive.fixed_pairs", -1);
    if (fixed >= 0) e.drive.fixed_pairs = fixed;

    e.detector.efficiency = cfg.get_double("detector.efficiency", e.detector.efficiency);
    e.detector.jitter_fwhm_ps =
        cfg.get_double("detector.jitter_fwhm_ps", e.detector.jitter_fwhm_ps);
    e.detector.dark_rate_cps =
        cfg.get_double("detector.dark_rate_cps", e.detector.dark_rate_cps);
    e.detector.dead_time_ps = cfg.get_double("detector.dead_time_ps", e.detector.dead_time_ps);

    e.geometry.diameter_nm = cfg.get_double("geometry.diameter_nm", e.geometry.diameter_nm);
    e.geometry.n_core = cfg.get_double("geometry.n_core", e.geometry.n_core);
    e.geometry.n_clad = cfg.get_double("geometry.n_clad", e.geometry.n_clad);

    e.linewidth.gamma0_uev = cfg.get_double("linewidth.gamma0_uev", e.linewidth.gamma0_uev);
    e.linewidth.a_uev_per_K = cfg.get_double("linewidth.a_uev_per_K", e.linewidth.a_uev_per_K);
    e.linewidth.b_uev = cfg.get_double("linewidth.b_uev", e.linewidth.b_uev);
    e.linewidth.e_ph_meV = cfg.get_double("linewidth.e_ph_meV", e.linewidth.e_ph_meV);

    e.temperature_K = cfg.get_double("experiment.temperature_K", e.temperature_K);
    e.setup_throughput = cfg.get_double("experiment.setup_throughput", e.setup_throughput);
    e.filter_center_nm = cfg.get_double("experiment.filter_center_nm", e.filter_center_nm);
    e.filter_width_nm = cfg.get_double("experiment.filter_width_nm", e.filter_width_nm);
    e.g2_bin_width_ps = cfg.get_double("experiment.g2_bin_width_ps", e.g2_bin_width_ps);
    e.g2_side_peaks = cfg.get_int("experiment.g2_side_peaks", e.g2_side_peaks);
    e.trpl_bin_width_ps = cfg.get_double("experiment.trpl_bin_width_ps", e.trpl_bin_width_ps);
    e.seed = static_cast<std::uint64_t>(cfg.get_double("experiment.seed", 1.0));

    e.sweep_temperatures = cfg.get_list("sweep.temperatures", e.sweep_temperatures);
    e.sweep_powers = cfg.get_list("sweep.powers", e.sweep_powers);

    e.emitter.validate();
    e.drive.validate();
    e.detector.validate();
    e.geometry.validate();
    if (!(e.setup_throughput > 0.0 && e.setup_throughput <= 1.0))
        throw ConfigError("experiment.setup_throughput must lie in (0, 1]");
    if (!(e.filter_width_nm > 0.0))
        throw ConfigError("experiment.filter_width_nm must be > 0");
    if (e.g2_side_peaks < 6)
        throw ConfigError("experiment.g2_side_peaks must be >= 6");

    if (cfg.get_bool("lifetime.auto_calibrate", true)) {
        e.lifetime = calibrated_lifetime_defaults(e.geometry);
    } else {
        e.lifetime.tau_rad_bulk_ns =
            cfg.get_double("lifetime.tau_rad_bulk_ns", e.lifetime.tau_rad_bulk_ns);
        e.lifetime.manifold[1].offset_meV =
            cfg.get_double("lifetime.dark_splitting_meV", e.lifetime.manifold[1].offset_meV);
        e.lifetime.manifold[2].multiplicity =
            cfg.get_double("lifetime.p_multiplicity", e.lifetime.manifold[2].multiplicity);
        e.lifetime.validate();
    }
    cfg.check_all_consumed();
    return e;
}

std::string default_config_text() {
    const ExperimentConfig e;
    std::ostringstream os;
    os << "# defaults generated from code\n";
    auto kv = [&](const char* k, double v) { os << k << " = " << v << "\n"; };
    kv("emitter.tau_x0_ns", e.emitter.tau_x0_ns);
    kv("emitter.tau_xx_ratio", e.emitter.tau_xx_ratio);
    kv("emitter.capture_rate_per_ns", e.emitter.capture_rate_per_ns);
    kv("emitter.relax_rate_per_ns", e.emitter.relax_rate_per_ns);
    kv("emitter.dark_splitting_meV", e.emitter.dark_splitting_meV);
    kv("emitter.sp_splitting_meV", e.emitter.sp_splitting_meV);
    kv("emitter.spin_flip_rate_per_ns", e.emitter.spin_flip_rate_per_ns);
    kv("emitter.xx_binding_meV", e.emitter.xx_binding_meV);
    kv("emitter.max_excitons", e.emitter.max_excitons);
    kv("drive.rep_rate_mhz", e.drive.rep_rate_mhz);
    kv("drive.power_ratio", e.drive.power_ratio);
    kv("drive.n_pulses", 8e6);
    kv("drive.mu_sat", e.drive.mu_sat);
    os << "drive.fixed_pairs = -1  # -1 disables the Poisson bypass\n";
    kv("detector.efficiency", e.detector.efficiency);
    kv("detector.jitter_fwhm_ps", e.detector.jitter_fwhm_ps);
    kv("detector.dark_rate_cps", e.detector.dark_rate_cps);
    kv("detector.dead_time_ps", e.detector.dead_time_ps);
    kv("geometry.diameter_nm", e.geometry.diameter_nm);
    kv("geometry.n_core", e.geometry.n_core);
    kv("geometry.n_clad", e.geometry.n_clad);
    kv("linewidth.gamma0_uev", e.linewidth.gamma0_uev);
    kv("linewidth.a_uev_per_K", e.linewidth.a_uev_per_K);
    kv("linewidth.b_uev", e.linewidth.b_uev);
    kv("linewidth.e_ph_meV", e.linewidth.e_ph_meV);
    kv("experiment.temperature_K", e.temperature_K);
    kv("experiment.setup_throughput", e.setup_throughput);
    kv("experiment.filter_center_nm", e.filter_center_nm);
    kv("experiment.filter_width_nm", e.filter_width_nm);
    kv("experiment.g2_bin_width_ps", e.g2_bin_width_ps);
    kv("experiment.g2_side_peaks", e.g2_side_peaks);
    kv("experiment.trpl_bin_width_ps", e.trpl_bin_width_ps);
    os << "experiment.seed = 1\n";
    os << "lifetime.auto_calibrate = true\n";
    os << "sweep.temperatures = 4, 40, 77, 120, 160, 220, 300\n";
    os << "sweep.powers = 0.05, 0.1, 0.2, 0.5, 1, 2, 4\n";
    return os.str();
}

namespace {

struct LifetimeCtx {
    const LifetimeModelParams* params;
    const NanowireGeometry* geometry;
};

double lifetime_dispatch(double temperature_K, const void* ctx) {
    const auto* c = static_cast<const LifetimeCtx*>(ctx);
    return lifetime_ns(temperature_K, *c->params, *c->geometry);
}

ClickStream merge_clicks(const ClickStream& a, const ClickStream& b) {
    ClickStream out;
    out.channel = -1;
    out.meta = a.meta;
    out.times_ps.resize(a.times_ps.size() + b.times_ps.size());
    std::merge(a.times_ps.begin(), a.times_ps.end(), b.times_ps.begin(), b.times_ps.end(),
               out.times_ps.begin());
    return out;
}

}  // namespace

double lifetime_at(const ExperimentConfig& cfg, double temperature_K) {
    return lifetime_ns(temperature_K, cfg.lifetime, cfg.geometry);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
    PipelineResult out;
    const double period = cfg.drive.rep_period_ps();

    LifetimeCtx ctx{&cfg.lifetime, &cfg.geometry};
    LifetimeFn lt{&lifetime_dispatch, &ctx};
    out.model_lifetime_ns = lt(cfg.temperature_K);

    PhotonStream raw = simulate_pulse_train(cfg.emitter, cfg.drive, cfg.temperature_K, lt,
                                            derive_seed(cfg.seed, "emit"));

    const std::vector<SpectrumLine> lines =
        synth_line_set(cfg.emitter, cfg.temperature_K, cfg.drive.power_ratio, cfg.linewidth);
    BandpassFilter filter;
    filter.width_nm = cfg.filter_width_nm;
    filter.center_nm = cfg.filter_center_nm > 0.0 ? cfg.filter_center_nm
                                                  : emission_wavelength(cfg.temperature_K);
    PhotonStream filtered =
        apply_bandpass(raw, filter, lines, derive_seed(cfg.seed, "filter"));
    out.filtered =
        apply_loss(filtered, cfg.setup_throughput, derive_seed(cfg.seed, "loss"));

    out.duration_s = static_cast<double>(cfg.drive.n_pulses) * period * 1e-12;
    auto [c0, c1] =
        hbt_detect(out.filtered, cfg.detector, out.duration_s, derive_seed(cfg.seed, "detect"));
    out.clicks0 = std::move(c0);
    out.clicks1 = std::move(c1);
    out.detected_rate_mcps =
        (out.clicks0.times_ps.size() + out.clicks1.times_ps.size()) / out.duration_s * 1e-6;

    const double window =
        std::floor(cfg.g2_side_peaks * period / cfg.g2_bin_width_ps) * cfg.g2_bin_width_ps;
    out.coincidences = correlate(out.clicks0, out.clicks1, cfg.g2_bin_width_ps, window);
    out.decay = trpl_histogram(merge_clicks(out.clicks0, out.clicks1), period,
                               cfg.trpl_bin_width_ps);

    out.trpl_fit = fit_trpl(out.decay);
    out.g2_fit = fit_g2(out.coincidences, out.trpl_fit.lifetime_ns, period);

    double hw = default_g2_halfwidth_ps(out.trpl_fit.lifetime_ns, period,
                                        cfg.detector.jitter_fwhm_ps);
    hw = std::clamp(hw, cfg.g2_bin_width_ps, 0.499 * period);
    out.g2_int = g2_integrated(out.coincidences, period, hw);
    return out;
}

double sweep_power_for(double temperature_K) { return temperature_K <= 120.0 ? 0.5 : 0.25; }

double sweep_filter_width_for(double temperature_K) {
    if (temperature_K < 20.0) return 0.1;  // narrow grating while the line is still narrower than it
    if (temperature_K < 260.0) return 12.0;
    return 25.0;
}

namespace {

template <typename Row, typename Fn>
std::vector<Row> parallel_points(std::size_t n, int jobs, Fn&& point) {
    std::vector<Row> rows(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) point(i, rows[i]);
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> run_temperature_sweep(const ExperimentConfig& cfg, int jobs) {
    if (cfg.sweep_temperatures.empty())
        throw std::invalid_argument("temperature sweep list is empty");
    return parallel_points<SweepRow>(
        cfg.sweep_temperatures.size(), jobs, [&](std::size_t i, SweepRow& row) {
            const double T = cfg.sweep_temperatures[i];
            row.temperature_K = T;
            try {
                ExperimentConfig point = cfg;
                point.temperature_K = T;
                point.drive.rep_rate_mhz = 20.0;  // slow enough for the 300 K lifetime
                point.drive.power_ratio = sweep_power_for(T);
                point.filter_width_nm = sweep_filter_width_for(T);
                point.filter_center_nm = 0.0;  // track the shifting line
                point.seed = derive_seed(cfg.seed, "sweep-temperature", i);
                row.power_ratio = point.drive.power_ratio;
                row.filter_width_nm = point.filter_width_nm;
                row.wavelength_nm = emission_wavelength(T);
                row.linewidth_uev = linewidth_uev(T, cfg.linewidth);
                const PipelineResult res = run_pipeline(point);
                row.lifetime_ns = res.trpl_fit.lifetime_ns;
                row.g2_zero = res.g2_fit.g2_zero;
                row.g2_int = res.g2_int;
                row.background = res.g2_fit.background_level;
                row.residual = res.g2_fit.residual_norm;
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
        });
}

std::vector<PowerRow> run_power_sweep(const ExperimentConfig& cfg, int jobs) {
    if (cfg.sweep_powers.empty()) throw std::invalid_argument("power sweep list is empty");
    return parallel_points<PowerRow>(
        cfg.sweep_powers.size(), jobs, [&](std::size_t i, PowerRow& row) {
            row.power_ratio = cfg.sweep_powers[i];
            try {
                ExperimentConfig point = cfg;
                point.drive.power_ratio = cfg.sweep_powers[i];
                point.seed = derive_seed(cfg.seed, "sweep-power", i);
                const PipelineResult res = run_pipeline(point);
                row.detected_rate_mcps = res.detected_rate_mcps;
                row.g2_zero = res.g2_fit.g2_zero;
                row.g2_int = res.g2_int;
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
        });
}

}  // namespace qdsim

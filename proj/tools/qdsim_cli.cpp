#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qdsim/budget.hpp"
#include "qdsim/experiment.hpp"
#include "qdsim/io.hpp"
#include "qdsim/random.hpp"
#include "qdsim/units.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFit = 4;

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

qdsim::Config load_config(const Common& c) {
    if (c.config_path.empty()) return qdsim::Config::parse(qdsim::default_config_text());
    return qdsim::Config::parse_file(c.config_path);
}

qdsim::ExperimentConfig load_exp(const Common& c) {
    qdsim::ExperimentConfig cfg = qdsim::load_experiment(load_config(c));
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw qdsim::IoError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_trpl_report(const std::string& path, const qdsim::TrplFit& f) {
    qdsim::write_table(path, {}, "lifetime_ns,amplitude,background,residual,iterations,converged",
                       {fmt(f.lifetime_ns) + "," + fmt(f.amplitude) + "," + fmt(f.background) +
                        "," + fmt(f.residual_norm) + "," + std::to_string(f.iterations) + "," +
                        (f.converged ? "1" : "0")});
}

void write_g2_report(const std::string& path, const qdsim::G2Fit& f, double g2_int) {
    qdsim::write_table(
        path, {},
        "g2_zero,g2_integrated,background,peak_amplitude,lifetime_used_ns,residual,converged",
        {fmt(f.g2_zero) + "," + fmt(g2_int) + "," + fmt(f.background_level) + "," +
         fmt(f.peak_amplitude) + "," + fmt(f.lifetime_used_ns) + "," + fmt(f.residual_norm) +
         "," + (f.converged ? "1" : "0")});
}

int cmd_simulate(const Common& c) {
    const qdsim::ExperimentConfig cfg = load_exp(c);
    ensure_out_dir(c.out_dir);

    // simulation stages only; no fitting here
    struct Ctx {
        const qdsim::LifetimeModelParams* p;
        const qdsim::NanowireGeometry* g;
    } ctx{&cfg.lifetime, &cfg.geometry};
    qdsim::LifetimeFn lt{[](double T, const void* vc) {
                             const auto* x = static_cast<const Ctx*>(vc);
                             return qdsim::lifetime_ns(T, *x->p, *x->g);
                         },
                         &ctx};
    qdsim::PhotonStream raw = qdsim::simulate_pulse_train(
        cfg.emitter, cfg.drive, cfg.temperature_K, lt, qdsim::derive_seed(cfg.seed, "emit"));
    const auto lines =
        qdsim::synth_line_set(cfg.emitter, cfg.temperature_K, cfg.drive.power_ratio, cfg.linewidth);
    qdsim::BandpassFilter filter{cfg.filter_center_nm > 0.0
                                     ? cfg.filter_center_nm
                                     : qdsim::emission_wavelength(cfg.temperature_K),
                                 cfg.filter_width_nm};
    qdsim::PhotonStream filtered =
        qdsim::apply_bandpass(raw, filter, lines, qdsim::derive_seed(cfg.seed, "filter"));
    filtered = qdsim::apply_loss(filtered, cfg.setup_throughput,
                                 qdsim::derive_seed(cfg.seed, "loss"));
    const double duration_s =
        static_cast<double>(cfg.drive.n_pulses) * cfg.drive.rep_period_ps() * 1e-12;
    auto [c0, c1] = qdsim::hbt_detect(filtered, cfg.detector, duration_s,
                                      qdsim::derive_seed(cfg.seed, "detect"));

    qdsim::write_photon_stream(join(c.out_dir, "stream.csv"), filtered);
    qdsim::write_click_streams(join(c.out_dir, "clicks.csv"), c0, c1);
    return 0;
}

int cmd_g2(const Common& c) {
    const qdsim::ExperimentConfig cfg = load_exp(c);
    ensure_out_dir(c.out_dir);
    qdsim::PipelineResult res;
    try {
        res = qdsim::run_pipeline(cfg);
    } catch (const qdsim::FitError& ex) {
        std::cerr << "fit failed: " << ex.what() << "\n";
        return kExitFit;
    }
    const qdsim::MetaBlock meta = qdsim::stream_meta_block(res.filtered.meta);
    qdsim::write_histogram(join(c.out_dir, "g2_hist.csv"), res.coincidences, meta);
    qdsim::write_histogram(join(c.out_dir, "trpl_hist.csv"), res.decay, meta);
    write_trpl_report(join(c.out_dir, "trpl_fit.csv"), res.trpl_fit);
    write_g2_report(join(c.out_dir, "g2_fit.csv"), res.g2_fit, res.g2_int);
    if (!res.trpl_fit.converged || !res.g2_fit.converged) {
        std::cerr << "fit did not converge; partial report written\n";
        return kExitFit;
    }
    std::cout << "g2_zero = " << fmt(res.g2_fit.g2_zero)
              << "  g2_integrated = " << fmt(res.g2_int)
              << "  lifetime_ns = " << fmt(res.trpl_fit.lifetime_ns) << "\n";
    return 0;
}

int cmd_trpl(const Common& c) {
    const qdsim::ExperimentConfig cfg = load_exp(c);
    ensure_out_dir(c.out_dir);
    qdsim::PipelineResult res;
    try {
        res = qdsim::run_pipeline(cfg);
    } catch (const qdsim::FitError& ex) {
        std::cerr << "fit failed: " << ex.what() << "\n";
        return kExitFit;
    }
    qdsim::write_histogram(join(c.out_dir, "trpl_hist.csv"), res.decay,
                           qdsim::stream_meta_block(res.filtered.meta));
    write_trpl_report(join(c.out_dir, "trpl_fit.csv"), res.trpl_fit);
    if (!res.trpl_fit.converged) {
        std::cerr << "fit did not converge; partial report written\n";
        return kExitFit;
    }
    std::cout << "lifetime_ns = " << fmt(res.trpl_fit.lifetime_ns) << "\n";
    return 0;
}

int cmd_sweep_temperature(const Common& c) {
    const qdsim::ExperimentConfig cfg = load_exp(c);
    ensure_out_dir(c.out_dir);
    const auto rows = qdsim::run_temperature_sweep(cfg, c.jobs);
    qdsim::write_sweep_rows(join(c.out_dir, "sweep_temperature.csv"), rows,
                            {{"seed", std::to_string(cfg.seed)}});
    for (const auto& r : rows)
        if (!r.error.empty())
            std::cerr << "T = " << r.temperature_K << " K failed: " << r.error << "\n";
    return 0;
}

int cmd_sweep_power(const Common& c) {
    const qdsim::ExperimentConfig cfg = load_exp(c);
    ensure_out_dir(c.out_dir);
    const auto rows = qdsim::run_power_sweep(cfg, c.jobs);
    qdsim::write_power_rows(join(c.out_dir, "sweep_power.csv"), rows,
                            {{"seed", std::to_string(cfg.seed)}});
    for (const auto& r : rows)
        if (!r.error.empty())
            std::cerr << "P = " << r.power_ratio << " P_sat failed: " << r.error << "\n";
    return 0;
}

int cmd_budget(const Common& c) {
    const qdsim::Config raw = load_config(c);
    qdsim::BudgetInputs in;
    in.detected_rate_mcps = raw.get_double("budget.detected_rate_mcps", 1.86);
    in.rep_rate_mhz = raw.get_double("budget.rep_rate_mhz", 80.0);
    in.detector_efficiency = raw.get_double("budget.detector_efficiency", 0.90);
    in.setup_throughput = raw.get_double("budget.setup_throughput", 0.10);
    in.sideband_fraction = raw.get_double("budget.sideband_fraction", 0.20);
    in.g2_zero = raw.get_double("budget.g2_zero", 0.021);
    const double mirror = raw.get_double("budget.mirror_reflectivity", 0.91);
    if (mirror >= 0.0) in.mirror_reflectivity = mirror;
    const std::string corr = raw.get_string("budget.correction", "linear");
    if (corr == "linear") in.correction = qdsim::MultiphotonCorrection::Linear;
    else if (corr == "sqrt") in.correction = qdsim::MultiphotonCorrection::Sqrt;
    else throw qdsim::ConfigError("budget.correction must be 'linear' or 'sqrt'");
    if (c.config_path.empty()) {
        // defaults only; nothing else to consume
    } else {
        raw.check_all_consumed();
    }

    const qdsim::EfficiencyBudget b = qdsim::compute_budget(in);
    std::cout << qdsim::budget_report(in, b);
    ensure_out_dir(c.out_dir);
    std::ofstream out(join(c.out_dir, "budget.csv"));
    if (!out) throw qdsim::IoError("cannot write budget.csv");
    out << qdsim::budget_csv(in, b);
    return 0;
}

int cmd_waveguide(const Common& c) {
    const qdsim::Config raw = load_config(c);
    const std::vector<double> diameters =
        raw.get_list("waveguide.diameters_nm", {200.0, 310.0, 400.0});
    const double lo = raw.get_double("waveguide.lambda_min_nm", 1100.0);
    const double hi = raw.get_double("waveguide.lambda_max_nm", 1500.0);
    const double step = raw.get_double("waveguide.lambda_step_nm", 25.0);
    const double n_core = raw.get_double("waveguide.n_core", 3.2);
    const double n_clad = raw.get_double("waveguide.n_clad", 1.0);
    if (!c.config_path.empty()) raw.check_all_consumed();
    if (!(lo > 0.0 && hi > lo && step > 0.0))
        throw qdsim::ConfigError("bad waveguide wavelength range");

    std::vector<std::string> rows;
    for (double d : diameters) {
        qdsim::NanowireGeometry geom{d, n_core, n_clad};
        for (double wl = lo; wl <= hi + 1e-9; wl += step) {
            const qdsim::ModeSolution m = qdsim::he11_neff(geom, wl);
            const double f = qdsim::se_rate_relative(geom, wl);
            rows.push_back(fmt(d) + "," + fmt(wl) + "," + fmt(m.n_eff) + "," +
                           fmt(m.v_number) + "," + fmt(m.confinement) + "," + fmt(f));
        }
    }
    ensure_out_dir(c.out_dir);
    qdsim::write_table(join(c.out_dir, "waveguide.csv"), {},
                       "diameter_nm,wavelength_nm,n_eff,v_number,confinement,se_rate_relative",
                       rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pulsed single-photon-source simulator and analysis toolkit"};
    app.require_subcommand(0, 1);

    Common common;
    std::uint64_t seed_arg = 0;
    bool seed_given = false;
    bool print_defaults = false;

    for (CLI::App* target : {&app}) {
        target->add_option("--config", common.config_path, "configuration file path");
        target->add_option("--out", common.out_dir, "output directory");
        target->add_option("--seed", seed_arg, "master seed override")
            ->each([&](const std::string&) { seed_given = true; });
        target->add_option("--jobs", common.jobs, "parallel sweep workers")
            ->check(CLI::PositiveNumber);
    }
    app.add_flag("--print-default-config", print_defaults,
                 "print the generated defaults document and exit");
    app.fallthrough();

    CLI::App* sub_simulate = app.add_subcommand("simulate", "generate photon/click streams");
    CLI::App* sub_g2 = app.add_subcommand("g2", "coincidence histogram and g2 fits");
    CLI::App* sub_trpl = app.add_subcommand("trpl", "decay histogram and lifetime fit");
    CLI::App* sub_sweep_t =
        app.add_subcommand("sweep-temperature", "full pipeline across temperatures");
    CLI::App* sub_sweep_p = app.add_subcommand("sweep-power", "full pipeline across powers");
    CLI::App* sub_budget = app.add_subcommand("budget", "efficiency budget report");
    CLI::App* sub_wg = app.add_subcommand("waveguide", "HE11 dispersion sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (print_defaults) {
        std::cout << qdsim::default_config_text();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }
    if (seed_given) common.seed = seed_arg;

    try {
        if (sub_simulate->parsed()) return cmd_simulate(common);
        if (sub_g2->parsed()) return cmd_g2(common);
        if (sub_trpl->parsed()) return cmd_trpl(common);
        if (sub_sweep_t->parsed()) return cmd_sweep_temperature(common);
        if (sub_sweep_p->parsed()) return cmd_sweep_power(common);
        if (sub_budget->parsed()) return cmd_budget(common);
        if (sub_wg->parsed()) return cmd_waveguide(common);
    } catch (const qdsim::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const qdsim::IoError& ex) {
        std::cerr << "I/O error: " << ex.what() << "\n";
        return kExitIo;
    } catch (const qdsim::FitError& ex) {
        std::cerr << "fit error: " << ex.what() << "\n";
        return kExitFit;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}

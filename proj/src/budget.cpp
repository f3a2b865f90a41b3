#include "qdsim/budget.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qdsim {

void BudgetInputs::validate() const {
    auto check_frac = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    };
    if (!(detected_rate_mcps >= 0.0))
        throw std::invalid_argument("detected_rate must be >= 0");
    if (!(rep_rate_mhz > 0.0)) throw std::invalid_argument("rep_rate must be > 0");
    if (detected_rate_mcps > rep_rate_mhz)
        throw std::invalid_argument("detected_rate must not exceed rep_rate");
    check_frac(detector_efficiency, "detector_efficiency");
    check_frac(setup_throughput, "setup_throughput");
    check_frac(sideband_fraction, "sideband_fraction");
    check_frac(g2_zero, "g2_zero");
    if (detector_efficiency == 0.0)
        throw std::invalid_argument("detector_efficiency must be > 0");
    if (setup_throughput == 0.0) throw std::invalid_argument("setup_throughput must be > 0");
    if (sideband_fraction == 1.0)
        throw std::invalid_argument("sideband_fraction = 1 is not allowed");
    if (mirror_reflectivity) check_frac(*mirror_reflectivity, "mirror_reflectivity");
}

EfficiencyBudget compute_budget(const BudgetInputs& in) {
    in.validate();
    EfficiencyBudget b;
    b.end_to_end_raw = in.detected_rate_mcps / in.rep_rate_mhz;
    b.end_to_end_detcorr = b.end_to_end_raw / in.detector_efficiency;
    b.first_lens = b.end_to_end_detcorr / in.setup_throughput;
    const double mp = in.correction == MultiphotonCorrection::Linear
                          ? 1.0 - in.g2_zero
                          : std::sqrt(1.0 - in.g2_zero);
    b.first_lens_single_photon = b.first_lens * mp;
    b.first_lens_with_sideband = b.first_lens / (1.0 - in.sideband_fraction);
    if (in.mirror_reflectivity)
        b.mirror_projection = b.first_lens * (1.0 + *in.mirror_reflectivity);
    return b;
}

double round_sig_figs(double value, int figs) {
    if (value == 0.0) return 0.0;
    const double mag = std::floor(std::log10(std::fabs(value)));
    const double scale = std::pow(10.0, figs - 1 - mag);
    return std::round(value * scale) / scale;
}

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string pct2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", round_sig_figs(v, 2) * 100.0);
    return buf;
}

}  // namespace

std::string budget_report(const BudgetInputs& in, const EfficiencyBudget& b) {
    std::ostringstream os;
    auto row = [&](const char* name, double v) {
        char line[96];
        std::snprintf(line, sizeof line, "%-28s %10s  %8s\n", name, fmt4(v).c_str(),
                      pct2(v).c_str());
        os << line;
    };
    os << "stage                             fraction   rounded\n";
    row("end_to_end_raw", b.end_to_end_raw);
    row("end_to_end_detcorr", b.end_to_end_detcorr);
    row("first_lens", b.first_lens);
    row("first_lens_single_photon", b.first_lens_single_photon);
    row("first_lens_with_sideband", b.first_lens_with_sideband);
    if (b.mirror_projection) row("mirror_projection", *b.mirror_projection);
    os << "multiphoton correction: "
       << (in.correction == MultiphotonCorrection::Linear ? "(1 - g2)" : "sqrt(1 - g2)") << "\n";
    return os.str();
}

std::string budget_csv(const BudgetInputs& in, const EfficiencyBudget& b) {
    std::ostringstream os;
    os << "end_to_end_raw,end_to_end_detcorr,first_lens,first_lens_single_photon,"
          "first_lens_with_sideband,mirror_projection\n";
    os << fmt4(b.end_to_end_raw) << ',' << fmt4(b.end_to_end_detcorr) << ','
       << fmt4(b.first_lens) << ',' << fmt4(b.first_lens_single_photon) << ','
       << fmt4(b.first_lens_with_sideband) << ',';
    if (b.mirror_projection) os << fmt4(*b.mirror_projection);
    os << '\n';
    (void)in;
    return os.str();
}

}  // namespace qdsim

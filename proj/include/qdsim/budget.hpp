#pragma once

#include <optional>
#include <string>

namespace qdsim {

enum class MultiphotonCorrection {
    Linear,  // first_lens * (1 - g2)
    Sqrt,    // first_lens * sqrt(1 - g2)
};

struct BudgetInputs {
    double detected_rate_mcps = 0.0;
    double rep_rate_mhz = 0.0;
    double detector_efficiency = 1.0;
    double setup_throughput = 1.0;
    double sideband_fraction = 0.0;
    double g2_zero = 0.0;
    std::optional<double> mirror_reflectivity;
    MultiphotonCorrection correction = MultiphotonCorrection::Linear;

    void validate() const;  // throws std::invalid_argument
};

struct EfficiencyBudget {
    double end_to_end_raw = 0.0;
    double end_to_end_detcorr = 0.0;
    double first_lens = 0.0;
    double first_lens_single_photon = 0.0;
    double first_lens_with_sideband = 0.0;
    std::optional<double> mirror_projection;
};

EfficiencyBudget compute_budget(const BudgetInputs& in);

// Rounds to the displayed precision used in published efficiency chains
// (two significant figures), e.g. 0.2583 -> 0.26.
double round_sig_figs(double value, int figs);

// Aligned text table with a raw column (4 sig figs) and a rounded column.
std::string budget_report(const BudgetInputs& in, const EfficiencyBudget& b);

// One CSV row (with header line) mirroring the report.
std::string budget_csv(const BudgetInputs& in, const EfficiencyBudget& b);

}  // namespace qdsim

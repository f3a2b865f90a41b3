#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qdsim/emitter.hpp"
#include "qdsim/temperature.hpp"

namespace qdsim {

struct DetectorConfig {
    double efficiency = 0.9;
    double jitter_fwhm_ps = 60.0;
    double dark_rate_cps = 0.0;
    double dead_time_ps = 0.0;

    void validate() const;
};

struct ClickStream {
    int channel = 0;
    std::vector<double> times_ps;  // sorted
    StreamMeta meta;
};

enum class HistKind { Coincidence, Decay };

struct Histogram {
    double bin_width_ps = 0.0;
    double origin_ps = 0.0;  // left edge of bin 0
    std::vector<std::uint64_t> counts;
    HistKind kind = HistKind::Coincidence;

    double bin_center(std::size_t i) const { return origin_ps + (i + 0.5) * bin_width_ps; }
    std::uint64_t total() const;
    // Merge `factor` adjacent bins; total counts are preserved exactly.
    Histogram rebin(int factor) const;
};

struct BandpassFilter {
    double center_nm = 0.0;
    double width_nm = 0.0;  // full top-hat width
};

// Samples each photon's realized wavelength from its line's Lorentzian and
// keeps those landing inside the top-hat passband.
PhotonStream apply_bandpass(const PhotonStream& stream, const BandpassFilter& filter,
                            const std::vector<SpectrumLine>& lines, std::uint64_t seed);

// Bernoulli thinning (lumped setup throughput, extra loss stages).
PhotonStream apply_loss(const PhotonStream& stream, double survival, std::uint64_t seed);

// 50/50 splitter onto two detectors with efficiency, Gaussian jitter,
// Poisson dark counts and dead-time pruning (in that order).
std::pair<ClickStream, ClickStream> hbt_detect(const PhotonStream& stream,
                                               const DetectorConfig& det, double duration_s,
                                               std::uint64_t seed);

// All pairwise delays t_b - t_a within +-window, histogrammed at bin_width.
Histogram correlate(const ClickStream& a, const ClickStream& b, double bin_width_ps,
                    double window_ps);

// Same-stream correlation with i == j self-pairs excluded; each unordered
// pair contributes its +tau and -tau delay once.
Histogram autocorrelate(const ClickStream& a, double bin_width_ps, double window_ps);

Histogram trpl_histogram(const ClickStream& clicks, double sync_period_ps, double bin_width_ps);

}  // namespace qdsim

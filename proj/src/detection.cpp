#include "qdsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdsim/random.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

void DetectorConfig::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    if (!(jitter_fwhm_ps >= 0.0)) throw std::invalid_argument("jitter_fwhm must be >= 0");
    if (!(dark_rate_cps >= 0.0)) throw std::invalid_argument("dark_rate must be >= 0");
    if (!(dead_time_ps >= 0.0)) throw std::invalid_argument("dead_time must be >= 0");
}

std::uint64_t Histogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

Histogram Histogram::rebin(int factor) const {
    if (factor < 1) throw std::invalid_argument("rebin factor must be >= 1");
    Histogram out;
    out.bin_width_ps = bin_width_ps * factor;
    out.origin_ps = origin_ps;
    out.kind = kind;
    out.counts.assign((counts.size() + factor - 1) / factor, 0);
    for (std::size_t i = 0; i < counts.size(); ++i) out.counts[i / factor] += counts[i];
    return out;
}

PhotonStream apply_bandpass(const PhotonStream& stream, const BandpassFilter& filter,
                            const std::vector<SpectrumLine>& lines, std::uint64_t seed) {
    if (!(filter.width_nm > 0.0)) throw std::invalid_argument("filter width must be > 0");
    Rng rng = make_rng(seed);
    std::cauchy_distribution<double> unit_cauchy(0.0, 1.0);

    PhotonStream out;
    out.meta = stream.meta;
    const double lo = filter.center_nm - 0.5 * filter.width_nm;
    const double hi = filter.center_nm + 0.5 * filter.width_nm;
    for (const auto& rec : stream.records) {
        double fwhm_nm = 0.0;
        double center = rec.wavelength_nm;
        for (const auto& line : lines) {
            if (line.label == rec.line) {
                fwhm_nm = fwhm_nm_from_uev(line.fwhm_uev, line.center_nm);
                center = line.center_nm;
                break;
            }
        }
        const double realized = center + 0.5 * fwhm_nm * unit_cauchy(rng);
        if (realized >= lo && realized <= hi) {
            PhotonRecord r = rec;
            r.wavelength_nm = realized;
            out.records.push_back(r);
        }
    }
    return out;
}

PhotonStream apply_loss(const PhotonStream& stream, double survival, std::uint64_t seed) {
    if (!(survival >= 0.0 && survival <= 1.0))
        throw std::invalid_argument("survival must lie in [0, 1]");
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PhotonStream out;
    out.meta = stream.meta;
    for (const auto& rec : stream.records)
        if (unif(rng) < survival) out.records.push_back(rec);
    return out;
}

namespace {

void prune_dead_time(std::vector<double>& times, double dead_time_ps) {
    if (dead_time_ps <= 0.0 || times.empty()) return;
    std::vector<double> kept;
    kept.reserve(times.size());
    double last = -1e300;
    for (double t : times) {
        if (t - last >= dead_time_ps) {
            kept.push_back(t);
            last = t;
        }
    }
    times.swap(kept);
}

}  // namespace

std::pair<ClickStream, ClickStream> hbt_detect(const PhotonStream& stream,
                                               const DetectorConfig& det, double duration_s,
                                               std::uint64_t seed) {
    det.validate();
    if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double sigma = det.jitter_fwhm_ps / 2.3548200450309493;
    std::normal_distribution<double> jitter(0.0, sigma > 0.0 ? sigma : 1.0);

    ClickStream ch0, ch1;
    ch0.channel = 0;
    ch1.channel = 1;
    ch0.meta = ch1.meta = stream.meta;

    for (const auto& rec : stream.records) {
        const bool to_one = unif(rng) < 0.5;
        if (unif(rng) >= det.efficiency) continue;
        double t = rec.time_ps;
        if (sigma > 0.0) t += jitter(rng);
        (to_one ? ch1 : ch0).times_ps.push_back(t);
    }

    const double duration_ps = duration_s * 1e12;
    if (det.dark_rate_cps > 0.0) {
        const double mean = det.dark_rate_cps * duration_s;
        std::poisson_distribution<long> n_dark(mean);
        for (ClickStream* ch : {&ch0, &ch1}) {
            const long n = n_dark(rng);
            for (long i = 0; i < n; ++i) ch->times_ps.push_back(unif(rng) * duration_ps);
        }
    }

    for (ClickStream* ch : {&ch0, &ch1}) {
        std::sort(ch->times_ps.begin(), ch->times_ps.end());
        prune_dead_time(ch->times_ps, det.dead_time_ps);
    }
    return {std::move(ch0), std::move(ch1)};
}

namespace {

void require_sorted(const std::vector<double>& v, const char* name) {
    if (!std::is_sorted(v.begin(), v.end()))
        throw std::invalid_argument(std::string("unsorted click stream: ") + name);
}

Histogram make_coincidence_hist(double bin_width_ps, double window_ps) {
    if (!(bin_width_ps > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    const double ratio = window_ps / bin_width_ps;
    if (!(window_ps > 0.0) || std::fabs(ratio - std::round(ratio)) > 1e-9)
        throw std::invalid_argument("window must be a positive multiple of bin_width");
    Histogram h;
    h.bin_width_ps = bin_width_ps;
    h.origin_ps = -window_ps;
    h.kind = HistKind::Coincidence;
    h.counts.assign(2 * static_cast<std::size_t>(std::llround(ratio)), 0);
    return h;
}

inline void fill_delay(Histogram& h, double tau, double window_ps) {
    if (tau < -window_ps || tau >= window_ps) return;
    const auto idx = static_cast<std::size_t>((tau - h.origin_ps) / h.bin_width_ps);
    if (idx < h.counts.size()) ++h.counts[idx];
}

}  // namespace

Histogram correlate(const ClickStream& a, const ClickStream& b, double bin_width_ps,
                    double window_ps) {
    require_sorted(a.times_ps, "a");
    require_sorted(b.times_ps, "b");
    Histogram h = make_coincidence_hist(bin_width_ps, window_ps);

    // sliding two-index merge: for each click in a, all b clicks in window
    std::size_t lo = 0;
    for (double ta : a.times_ps) {
        while (lo < b.times_ps.size() && b.times_ps[lo] < ta - window_ps) ++lo;
        for (std::size_t j = lo; j < b.times_ps.size() && b.times_ps[j] < ta + window_ps; ++j)
            fill_delay(h, b.times_ps[j] - ta, window_ps);
    }
    return h;
}

Histogram autocorrelate(const ClickStream& a, double bin_width_ps, double window_ps) {
    require_sorted(a.times_ps, "a");
    Histogram h = make_coincidence_hist(bin_width_ps, window_ps);
    const auto& t = a.times_ps;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size() && t[j] - t[i] < window_ps; ++j) {
            fill_delay(h, t[j] - t[i], window_ps);
            fill_delay(h, t[i] - t[j], window_ps);
        }
    }
    return h;
}

Histogram trpl_histogram(const ClickStream& clicks, double sync_period_ps, double bin_width_ps) {
    if (!(sync_period_ps > 0.0)) throw std::invalid_argument("sync_period must be > 0");
    if (!(bin_width_ps > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    Histogram h;
    h.bin_width_ps = bin_width_ps;
    h.origin_ps = 0.0;
    h.kind = HistKind::Decay;
    h.counts.assign(static_cast<std::size_t>(std::ceil(sync_period_ps / bin_width_ps)), 0);
    for (double t : clicks.times_ps) {
        double phase = std::fmod(t, sync_period_ps);
        if (phase < 0.0) phase += sync_period_ps;
        const auto idx = static_cast<std::size_t>(phase / bin_width_ps);
        if (idx < h.counts.size()) ++h.counts[idx];
    }
    return h;
}

}  // namespace qdsim

#include "doctest.h"

#include "qdsim/emitter.hpp"
#include "qdsim/random.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace qdsim;

namespace {

double const_lifetime(double, const void* ctx) { return *static_cast<const double*>(ctx); }

LifetimeFn lifetime_of(const double& tau_ns) { return {&const_lifetime, &tau_ns}; }

std::map<std::uint64_t, std::vector<PhotonRecord>> by_pulse(const PhotonStream& s,
                                                            double period_ps) {
    std::map<std::uint64_t, std::vector<PhotonRecord>> out;
    for (const auto& r : s.records)
        out[static_cast<std::uint64_t>(r.time_ps / period_ps)].push_back(r);
    return out;
}

}  // namespace

TEST_CASE("saturation map: linear in power with zero at zero") {
    CHECK(saturation_map(0.0) == 0.0);
    CHECK(saturation_map(1.0, 3.0) == doctest::Approx(3.0));
    CHECK(saturation_map(0.25, 3.0) == doctest::Approx(0.75));
    CHECK(saturation_map(2.0, 3.0) == doctest::Approx(2.0 * saturation_map(1.0, 3.0)));
    // P(>=1 pair) at saturation
    CHECK(1.0 - std::exp(-saturation_map(1.0)) == doctest::Approx(0.950).epsilon(1e-3));
    CHECK_THROWS_AS(saturation_map(-0.5), std::invalid_argument);
}

TEST_CASE("config validation: bad rates and counts are rejected") {
    EmitterConfig e;
    e.capture_rate_per_ns = -1.0;
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
    e = EmitterConfig{};
    e.tau_xx_ratio = 1.5;
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
    e = EmitterConfig{};
    e.tau_x0_ns = std::nan("");
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
    e = EmitterConfig{};
    e.max_excitons = 3;
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);

    DriveConfig d;
    d.n_pulses = 100;
    d.power_ratio = -1.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("n_pulses = 0 raises the dedicated empty-simulation error") {
    DriveConfig d;
    d.n_pulses = 0;
    CHECK_THROWS_AS(d.validate(), EmptySimulationError);
    // ... which is still an invalid-argument for generic handlers.
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("simulate: zero drive power yields an empty stream") {
    EmitterConfig e;
    DriveConfig d;
    d.n_pulses = 1000;
    d.power_ratio = 0.0;
    const double tau = 2.1;
    const auto s = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 1);
    CHECK(s.records.empty());
    CHECK(s.meta.seed == 1);
}

TEST_CASE("simulate: identical seed and configs reproduce the stream exactly") {
    EmitterConfig e;
    DriveConfig d;
    d.n_pulses = 2000;
    d.power_ratio = 1.0;
    const double tau = 2.1;
    const auto a = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 42);
    const auto b = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 42);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].time_ps == b.records[i].time_ps);
        CHECK(a.records[i].line == b.records[i].line);
        CHECK(a.records[i].wavelength_nm == b.records[i].wavelength_nm);
    }
    const auto c = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 43);
    bool identical = c.records.size() == a.records.size();
    for (std::size_t i = 0; identical && i < a.records.size(); ++i)
        identical = a.records[i].time_ps == c.records[i].time_ps;
    CHECK_FALSE(identical);
}

TEST_CASE("simulate: stream is sorted with physical wavelengths and known lines") {
    EmitterConfig e;
    DriveConfig d;
    d.n_pulses = 5000;
    d.power_ratio = 1.0;
    const double tau = 2.1;
    const auto s = simulate_pulse_train(e, d, 77.0, lifetime_of(tau), 7);
    REQUIRE(!s.records.empty());
    double prev = -1.0;
    for (const auto& r : s.records) {
        CHECK(r.time_ps >= prev);
        prev = r.time_ps;
        CHECK(r.wavelength_nm > 0.0);
        CHECK((r.line == Line::X || r.line == Line::XX));
    }
    CHECK(s.meta.emitter_digest == emitter_digest(e));
    CHECK(s.meta.drive_digest == drive_digest(d));
    CHECK(s.meta.temperature_K == 77.0);
}

TEST_CASE("simulate: one forced pair with fast capture gives one exponential X per pulse") {
    EmitterConfig e;
    e.capture_rate_per_ns = 1e5;
    e.relax_rate_per_ns = 1e5;
    DriveConfig d;
    d.rep_rate_mhz = 1.0;  // 1 us period: decay tails fully contained
    d.n_pulses = 20000;
    d.fixed_pairs = 1;
    const double tau = 2.1;
    const auto s = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 3);
    const auto pulses = by_pulse(s, d.rep_period_ps());

    double sum_ns = 0.0;
    std::size_t n = 0;
    for (std::uint64_t i = 0; i + 1 < d.n_pulses; ++i) {  // last pulse may be truncated
        const auto it = pulses.find(i);
        REQUIRE(it != pulses.end());
        REQUIRE(it->second.size() == 1);
        CHECK(it->second[0].line == Line::X);
        sum_ns += (it->second[0].time_ps - i * d.rep_period_ps()) / 1e3;
        ++n;
    }
    const double mean = sum_ns / n;
    const double se = tau / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(mean - tau) < 3.0 * se);
}

TEST_CASE("simulate: two forced pairs cascade as XX before X in every pulse") {
    EmitterConfig e;
    e.capture_rate_per_ns = 1e5;
    e.relax_rate_per_ns = 1e5;
    DriveConfig d;
    d.rep_rate_mhz = 1.0;
    d.n_pulses = 5000;
    d.fixed_pairs = 2;
    const double tau = 2.1;
    const auto s = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 9);
    const auto pulses = by_pulse(s, d.rep_period_ps());
    for (std::uint64_t i = 0; i + 1 < d.n_pulses; ++i) {
        const auto it = pulses.find(i);
        REQUIRE(it != pulses.end());
        REQUIRE(it->second.size() == 2);
        CHECK(it->second[0].line == Line::XX);
        CHECK(it->second[1].line == Line::X);
        CHECK(it->second[0].time_ps < it->second[1].time_ps);
    }
}

TEST_CASE("simulate: vanishing drive is sub-Poissonian on the X line") {
    EmitterConfig e;
    DriveConfig d;
    d.n_pulses = 100000;
    d.power_ratio = 1.0;
    d.mu_sat = 3e-4;  // two-pair pulses vanishingly rare
    const double tau = 2.1;
    const auto s = simulate_pulse_train(e, d, 4.0, lifetime_of(tau), 13);
    const auto pulses = by_pulse(s, d.rep_period_ps());
    CHECK(!pulses.empty());
    for (const auto& [idx, recs] : pulses) CHECK(recs.size() <= 1);
}

TEST_CASE("simulate: fast spin flips stretch the lifetime by the Boltzmann factor") {
    // With flips much faster than decay the exciton motionally averages over
    // bright/dark; the effective decay rate is pi_bright / tau with
    // pi_bright = 1 / (1 + (g_d/g_b) exp(-dE/kT)).
    EmitterConfig e;
    e.capture_rate_per_ns = 1e5;
    e.relax_rate_per_ns = 1e5;
    e.spin_flip_rate_per_ns = 1000.0;
    e.dark_splitting_meV = 0.3;
    e.max_excitons = 1;
    DriveConfig d;
    d.rep_rate_mhz = 0.2;  // 5 us period
    d.n_pulses = 20000;
    d.fixed_pairs = 1;
    const double tau = 2.0;
    const double temperature = 300.0;
    const auto s = simulate_pulse_train(e, d, temperature, lifetime_of(tau), 21);

    const double kb = 8.617333262e-2;
    const double pi_bright = 1.0 / (1.0 + std::exp(-0.3 / (kb * temperature)));
    const double expected = tau / pi_bright;

    const auto pulses = by_pulse(s, d.rep_period_ps());
    double sum_ns = 0.0;
    std::size_t n = 0;
    for (const auto& [idx, recs] : pulses) {
        for (const auto& r : recs) {
            sum_ns += (r.time_ps - idx * d.rep_period_ps()) / 1e3;
            ++n;
        }
    }
    REQUIRE(n > 10000);
    const double mean = sum_ns / n;
    const double se = expected / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(mean - expected) < 3.0 * se);
}

TEST_CASE("simulate: rejects missing lifetime model and out-of-range temperature") {
    EmitterConfig e;
    DriveConfig d;
    d.n_pulses = 10;
    const double tau = 2.1;
    CHECK_THROWS_AS(simulate_pulse_train(e, d, 4.0, LifetimeFn{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pulse_train(e, d, 1.0, lifetime_of(tau), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_pulse_train(e, d, 350.0, lifetime_of(tau), 1),
                    std::invalid_argument);
}

TEST_CASE("digests: stable under copies, sensitive to any field") {
    EmitterConfig e;
    CHECK(emitter_digest(e) == emitter_digest(EmitterConfig{}));
    EmitterConfig e2 = e;
    e2.xx_binding_meV += 1e-6;
    CHECK(emitter_digest(e2) != emitter_digest(e));

    DriveConfig d;
    d.n_pulses = 10;
    DriveConfig d2 = d;
    d2.fixed_pairs = 1;
    CHECK(drive_digest(d2) != drive_digest(d));
}

TEST_CASE("seed derivation: stage tags decorrelate and are stable") {
    CHECK(derive_seed(1, "emit") == derive_seed(1, "emit"));
    CHECK(derive_seed(1, "emit") != derive_seed(1, "filter"));
    CHECK(derive_seed(1, "emit", 0) != derive_seed(1, "emit", 1));
    CHECK(derive_seed(1, "emit") != derive_seed(2, "emit"));
}

#include "doctest.h"

#include "qdsim/temperature.hpp"
#include "qdsim/units.hpp"
#include "qdsim/waveguide.hpp"

#include <cmath>

using namespace qdsim;

TEST_CASE("wavelength: anchor temperatures reproduce the calibration points") {
    CHECK(emission_wavelength(4.0) == doctest::Approx(1301.28).epsilon(1e-12));
    CHECK(emission_wavelength(300.0) == doctest::Approx(1397.8).epsilon(1e-12));
}

TEST_CASE("wavelength: frozen mid-range values of the fitted band-gap curve") {
    // Regression-locked evaluations of the two-anchor Varshni fit (beta = 600 K).
    CHECK(emission_wavelength(150.0) == doctest::Approx(1328.7893984706197).epsilon(1e-9));
    CHECK(emission_wavelength(77.0) == doctest::Approx(1309.1751840403524).epsilon(1e-9));
    CHECK(emission_wavelength(220.0) == doctest::Approx(1356.559318588351).epsilon(1e-9));
}

TEST_CASE("wavelength: strictly increasing and continuous over 4-300 K") {
    double prev = emission_wavelength(4.0);
    for (double t = 5.0; t <= 300.0; t += 1.0) {
        const double cur = emission_wavelength(t);
        CHECK(cur > prev);
        CHECK(cur - prev < 1.0);  // no jumps at 1 K resolution
        prev = cur;
    }
}

TEST_CASE("wavelength: rejects non-positive and out-of-range temperatures") {
    CHECK_THROWS_AS(emission_wavelength(0.0), std::invalid_argument);
    CHECK_THROWS_AS(emission_wavelength(-5.0), std::invalid_argument);
    CHECK_THROWS_AS(emission_wavelength(400.0), std::invalid_argument);
}

TEST_CASE("linewidth: 45 ueV floor at 4 K") {
    CHECK(linewidth_uev(4.0) == doctest::Approx(45.0).epsilon(1e-9));
}

TEST_CASE("linewidth: activated term vanishes in the T -> 0 limit") {
    CHECK(linewidth_uev(1e-6) == doctest::Approx(37.0).epsilon(1e-6));
}

TEST_CASE("linewidth: strictly increasing in temperature") {
    double prev = linewidth_uev(1.0);
    for (double t = 2.0; t <= 320.0; t += 1.0) {
        const double cur = linewidth_uev(t);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("linewidth: X and XX merge into a single peak near 150 K") {
    // Merge criterion: line separation smaller than the sum of half-widths.
    EmitterConfig emitter;
    auto merged = [&](double t) {
        const auto lines = synth_line_set(emitter, t, 0.5);
        const double e_x = energy_meV_from_wavelength(lines[0].center_nm);
        const double e_xx = energy_meV_from_wavelength(lines[1].center_nm);
        const double sep_uev = std::fabs(e_x - e_xx) * 1e3;
        return sep_uev < 0.5 * (lines[0].fwhm_uev + lines[1].fwhm_uev);
    };
    double first_merge = 0.0;
    for (double t = 50.0; t <= 300.0; t += 1.0) {
        if (merged(t)) {
            first_merge = t;
            break;
        }
    }
    REQUIRE(first_merge > 0.0);
    CHECK(first_merge >= 125.0);
    CHECK(first_merge <= 175.0);
    CHECK(merged(300.0));
    CHECK_FALSE(merged(77.0));
}

TEST_CASE("bright fraction: limits and bounds") {
    const std::vector<ManifoldLevel> two_level = {{0.0, 2.0, true}, {5.0, 2.0, false}};
    CHECK(bright_fraction(0.1, two_level) == doctest::Approx(1.0).epsilon(1e-9));
    // Equal multiplicities at T -> infinity split the population evenly.
    CHECK(bright_fraction(1e7, two_level) == doctest::Approx(0.5).epsilon(1e-4));
    for (double t : {4.0, 40.0, 120.0, 300.0}) {
        const double f = bright_fraction(t, two_level);
        CHECK(f > 0.0);
        CHECK(f <= 1.0);
    }
}

TEST_CASE("lifetime: bright-only manifold reduces to the waveguide factor") {
    NanowireGeometry geom;
    LifetimeModelParams params;
    params.tau_rad_bulk_ns = 1.7;
    params.manifold = {{0.0, 2.0, true}};
    const double t = 120.0;
    const double expected = 1.7 / se_rate_relative(geom, emission_wavelength(t));
    CHECK(lifetime_ns(t, params, geom) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lifetime: two-level manifold doubles tau in the high-T limit") {
    NanowireGeometry geom;
    LifetimeModelParams two;
    two.manifold = {{0.0, 2.0, true}, {0.05, 2.0, false}};
    LifetimeModelParams bright_only;
    bright_only.manifold = {{0.0, 2.0, true}};
    const double ratio = lifetime_ns(300.0, two, geom) / lifetime_ns(300.0, bright_only, geom);
    CHECK(ratio == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("lifetime: calibrated defaults hit both endpoints") {
    NanowireGeometry geom;
    const auto params = calibrated_lifetime_defaults(geom);
    const double t4 = lifetime_ns(4.0, params, geom);
    const double t300 = lifetime_ns(300.0, params, geom);
    CHECK(std::fabs(t4 - 2.1) / 2.1 < 0.10);
    CHECK(std::fabs(t300 - 10.8) / 10.8 < 0.10);
    CHECK(t300 / t4 == doctest::Approx(10.8 / 2.1).epsilon(0.10));
}

TEST_CASE("lifetime: monotone non-decreasing over a 20-point sweep") {
    NanowireGeometry geom;
    const auto params = calibrated_lifetime_defaults(geom);
    double prev = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double t = 4.0 + (300.0 - 4.0) * i / 19.0;
        const double tau = lifetime_ns(t, params, geom);
        CHECK(tau >= prev);
        prev = tau;
    }
}

TEST_CASE("lifetime: parameter validation") {
    LifetimeModelParams p;
    p.manifold = {{0.0, 2.0, true}, {0.3, 2.0, true}};  // two bright levels
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.manifold = {{0.5, 2.0, true}};  // bright level not at the ground energy
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.manifold = {{0.0, 2.0, true}};
    p.tau_rad_bulk_ns = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("line set: cold low-power spectrum has no p-shell emission") {
    EmitterConfig emitter;
    const auto lines = synth_line_set(emitter, 4.0, 0.1);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].label == Line::X);
    CHECK(lines[1].label == Line::XX);
    CHECK(lines[2].label == Line::PShell);
    CHECK(lines[2].relative_intensity == 0.0);
    CHECK(lines[0].relative_intensity > lines[1].relative_intensity);
}

TEST_CASE("line set: p-shell appears hot at high power, 68 meV above the X line") {
    EmitterConfig emitter;
    const auto lines = synth_line_set(emitter, 150.0, 1.0);
    CHECK(lines[2].relative_intensity > 0.0);
    const double e_x = energy_meV_from_wavelength(lines[0].center_nm);
    const double e_p = energy_meV_from_wavelength(lines[2].center_nm);
    CHECK(e_p - e_x == doctest::Approx(68.0).epsilon(1e-9));
    CHECK(lines[2].center_nm < lines[0].center_nm);  // shorter wavelength
}

TEST_CASE("line set: zero binding energy makes X and XX coincide") {
    EmitterConfig emitter;
    emitter.xx_binding_meV = 0.0;
    const auto lines = synth_line_set(emitter, 4.0, 1.0);
    CHECK(lines[0].center_nm == doctest::Approx(lines[1].center_nm).epsilon(1e-12));
}

TEST_CASE("line set: XX is red of X and twice as broad") {
    EmitterConfig emitter;
    const auto lines = synth_line_set(emitter, 40.0, 1.0);
    CHECK(lines[1].center_nm > lines[0].center_nm);
    CHECK(lines[1].fwhm_uev == doctest::Approx(2.0 * lines[0].fwhm_uev).epsilon(1e-12));
}

TEST_CASE("line set: intensities follow the Poisson pair statistics") {
    EmitterConfig emitter;
    const auto lines = synth_line_set(emitter, 4.0, 1.0);  // mu = 3 at saturation
    CHECK(lines[0].relative_intensity == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
    CHECK(lines[1].relative_intensity ==
          doctest::Approx(1.0 - std::exp(-3.0) * 4.0).epsilon(1e-12));
}

#include <catch2/catch_amalgamated.hpp>

#include <flim/phasor.hpp>

#include <array>
#include <cmath>
#include <complex>

using namespace flim;

// Reference values below were computed independently with 80 MHz modulation
// (w = 2*pi*0.08 rad/ns) and are pinned to full double precision.

TEST_CASE("angular frequency conversion") {
    CHECK(angular_frequency(80.0) == Catch::Approx(0.50265482457436691815).epsilon(1e-15));
    CHECK(angular_frequency(1000.0) == Catch::Approx(2.0 * std::numbers::pi).epsilon(1e-15));
    CHECK_THROWS_AS(angular_frequency(0.0), std::invalid_argument);
    CHECK_THROWS_AS(angular_frequency(-80.0), std::invalid_argument);
}

TEST_CASE("single decay phasor at 80 MHz") {
    const double w = angular_frequency(80.0);

    const auto p1 = decay_phasor(1.0, 1.0, w);
    CHECK(p1.real() == Catch::Approx(0.7983000215933972).epsilon(1e-14));
    CHECK(p1.imag() == Catch::Approx(0.40126935731174238).epsilon(1e-14));

    const auto p2 = decay_phasor(1.0, 2.0, w);
    CHECK(p2.real() == Catch::Approx(0.49735222342032862).epsilon(1e-14));
    CHECK(p2.imag() == Catch::Approx(0.4999929892300332).epsilon(1e-14));

    SECTION("zero lifetime sits at (A, 0)") {
        const auto p0 = decay_phasor(3.0, 0.0, w);
        CHECK(p0.real() == 3.0);
        CHECK(p0.imag() == 0.0);
    }
    SECTION("amplitude scales both components linearly") {
        const auto p5 = decay_phasor(5.0, 1.0, w);
        CHECK(p5.real() == Catch::Approx(5.0 * p1.real()).epsilon(1e-14));
        CHECK(p5.imag() == Catch::Approx(5.0 * p1.imag()).epsilon(1e-14));
    }
    SECTION("negative lifetime is rejected") {
        CHECK_THROWS_AS(decay_phasor(1.0, -0.5, w), std::invalid_argument);
    }
}

TEST_CASE("unit-amplitude phasors lie on the universal semicircle") {
    const std::array<double, 9> taus{0.01, 0.032, 0.1, 0.32, 1.0, 3.2, 10.0, 32.0, 100.0};
    for (double f : {20.0, 80.0, 160.0}) {
        const double w = angular_frequency(f);
        for (double tau : taus) {
            const auto p = decay_phasor(1.0, tau, w);
            CHECK(semicircle_radius_sq(p) == Catch::Approx(0.25).margin(1e-12));
        }
    }
}

TEST_CASE("phase lifetime inverts the decay phasor") {
    const std::array<double, 9> taus{0.01, 0.032, 0.1, 0.32, 1.0, 3.2, 10.0, 32.0, 100.0};
    for (double f : {20.0, 80.0, 160.0}) {
        const double w = angular_frequency(f);
        for (double tau : taus) {
            const auto p = decay_phasor(1.0, tau, w);
            CHECK(phase_lifetime(p, w) == Catch::Approx(tau).epsilon(1e-11));
            CHECK(modulation_lifetime(p, w, 1.0) == Catch::Approx(tau).epsilon(1e-7));
        }
    }
}

TEST_CASE("semicircle apex maps to the reciprocal angular frequency") {
    // At w*tau = 1 the unit phasor is exactly (1/2, 1/2), the top of the arc.
    const double w = angular_frequency(80.0);
    const auto apex = decay_phasor(1.0, 1.0 / w, w);
    CHECK(apex.real() == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(apex.imag() == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(phase_lifetime(apex, w) == Catch::Approx(1.9894367886486917).epsilon(1e-14));
}

TEST_CASE("two-component mixture at 80 MHz") {
    const double w = angular_frequency(80.0);
    const std::array<Fluorophore, 2> mix{{{1.0, 1.0}, {2.0, 1.0}}};
    const auto p = mixture_sample(mix, w);

    CHECK(p.real() == Catch::Approx(1.2956522450137258).epsilon(1e-14));
    CHECK(p.imag() == Catch::Approx(0.9012623465417756).epsilon(1e-14));

    SECTION("apparent lifetimes land between the two true lifetimes") {
        const double tau_phi = phase_lifetime(p, w);
        const double tau_m = modulation_lifetime(p, w, 2.0);
        CHECK(tau_phi == Catch::Approx(1.3838624332527281).epsilon(1e-13));
        CHECK(tau_m == Catch::Approx(1.5484263202560549).epsilon(1e-13));
        CHECK(tau_phi > 1.0);
        CHECK(tau_phi < 1.5);
        CHECK(tau_m > tau_phi); // heterogeneity always splits them this way
    }
    SECTION("mixture point falls inside the semicircle") {
        const auto unit = p / 2.0; // total amplitude is 2
        CHECK(semicircle_radius_sq(unit) < 0.25);
    }
    SECTION("empty mixture gives the origin") {
        const auto zero = mixture_sample({}, w);
        CHECK(zero.real() == 0.0);
        CHECK(zero.imag() == 0.0);
    }
    SECTION("negative magnitude is rejected") {
        const std::array<Fluorophore, 1> bad{{{1.0, -2.0}}};
        CHECK_THROWS_AS(mixture_sample(bad, w), std::invalid_argument);
    }
}

TEST_CASE("degenerate phasors produce NaN lifetimes instead of garbage") {
    const double w = angular_frequency(80.0);
    CHECK(std::isnan(phase_lifetime({0.0, 0.3}, w)));
    CHECK(std::isnan(phase_lifetime({5e-7, 0.3}, w)));      // under the relative floor
    CHECK(phase_lifetime({5e-7, 0.3}, w, 1e-3) > 0.0);      // floor scales with magnitude
    CHECK(std::isnan(modulation_lifetime({0.0, 0.0}, w, 1.0)));
    CHECK(std::isnan(modulation_lifetime({0.9, 0.9}, w, 1.0))); // |p| exceeds amplitude
    // a negative real part still has a well-defined (negative) phase lifetime
    CHECK(phase_lifetime({-0.5, 0.3}, w) < 0.0);
}

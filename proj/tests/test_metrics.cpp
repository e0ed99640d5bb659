#include <catch2/catch_amalgamated.hpp>

#include <flim/convolve.hpp>
#include <flim/kernel.hpp>
#include <flim/lifetime.hpp>
#include <flim/metrics.hpp>
#include <flim/phantom.hpp>

#include <algorithm>
#include <cmath>

using namespace flim;

namespace {

Profile profile_from(std::initializer_list<double> vals, double pitch = 300.0) {
    Profile p;
    p.values = vals;
    p.pixel_pitch_nm = pitch;
    return p;
}

} // namespace

TEST_CASE("profile extraction copies one row") {
    ScalarPlane plane(4, 3);
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            plane(x, y) = 10.0 * static_cast<double>(y) + static_cast<double>(x);
    const Profile p = extract_profile(plane, 1, 250.0);
    CHECK(p.values == std::vector<double>{10.0, 11.0, 12.0, 13.0});
    CHECK(p.pixel_pitch_nm == 250.0);
    CHECK_THROWS_AS(extract_profile(plane, 3, 250.0), std::out_of_range);
}

TEST_CASE("profile of the 2D phantom centre row equals the 1D phantom") {
    PhantomSpec spec2;
    spec2.width = 64;
    spec2.height = 33;
    spec2.boundary_px = 32.0;
    PhantomSpec spec1 = spec2;
    spec1.height = 1;
    const LifetimeMap t2 = make_phantom(spec2).truth;
    const LifetimeMap t1 = make_phantom(spec1).truth;
    const Profile row = extract_profile(t2, 16);
    const Profile line = extract_profile(t1, 0);
    REQUIRE(row.values.size() == line.values.size());
    for (std::size_t i = 0; i < row.values.size(); ++i)
        CHECK(row.values[i] == line.values[i]);
}

TEST_CASE("threshold crossing uses pixel-centre coordinates") {
    // Sample i sits at coordinate i + 0.5. For [1, 1, 2, 2] the 1.5 level
    // is crossed midway between samples 1 (at 1.5) and 2 (at 2.5).
    const BoundaryEstimate e =
        boundary_from_threshold(profile_from({1.0, 1.0, 2.0, 2.0}), 1.5, 1.0);
    CHECK(e.position_px == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(e.position_nm == Catch::Approx(2.0 * 300.0).epsilon(1e-12));

    SECTION("an ideal step crossing lands on the interface") {
        // values 1 for x < 8, 2 from x = 8: crossing at coordinate 8.0
        std::vector<double> v(16);
        for (std::size_t i = 0; i < 16; ++i) v[i] = i < 8 ? 1.0 : 2.0;
        Profile p;
        p.values = v;
        p.pixel_pitch_nm = 300.0;
        CHECK(boundary_from_threshold(p, 1.5, 1.0).position_px ==
              Catch::Approx(8.0).epsilon(1e-12));
    }
    SECTION("asymmetric thresholds move the crossing linearly") {
        const BoundaryEstimate q =
            boundary_from_threshold(profile_from({1.0, 1.0, 2.0, 2.0}), 1.25, 1.0);
        CHECK(q.position_px == Catch::Approx(1.75).epsilon(1e-12));
    }
    SECTION("descending profiles cross too") {
        const BoundaryEstimate q =
            boundary_from_threshold(profile_from({2.0, 2.0, 1.0, 1.0}), 1.5, 1.0);
        CHECK(q.position_px == Catch::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("crossing count errors are explicit") {
    CHECK_THROWS_WITH(boundary_from_threshold(profile_from({1.0, 1.1, 1.2, 1.3}), 1.5, 1.0),
                      Catch::Matchers::ContainsSubstring("found 0"));
    CHECK_THROWS_WITH(
        boundary_from_threshold(profile_from({1.0, 2.0, 1.0, 2.0, 1.0}), 1.5, 1.0),
        Catch::Matchers::ContainsSubstring("found 4"));
    CHECK_THROWS_AS(boundary_from_threshold(profile_from({1.0}), 1.5, 1.0),
                    std::domain_error);
}

TEST_CASE("the central window excludes edge crossings") {
    std::vector<double> v(100, 1.0);
    for (std::size_t i = 0; i < 4; ++i) v[i] = 2.0; // crossing at i = 3..4
    Profile p;
    p.values = v;
    p.pixel_pitch_nm = 300.0;
    // the default 80 percent window starts at sample 10
    CHECK_THROWS_WITH(boundary_from_threshold(p, 1.5),
                      Catch::Matchers::ContainsSubstring("found 0"));
    // widening the window to the full axis finds it
    CHECK(boundary_from_threshold(p, 1.5, 1.0).position_px ==
          Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("NaN samples are stepped over") {
    const BoundaryEstimate e = boundary_from_threshold(
        profile_from({std::nan(""), 1.0, 1.0, 2.0, 2.0, std::nan("")}), 1.5, 1.0);
    CHECK(e.position_px == Catch::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("crossing positions respect mirror symmetry") {
    std::vector<double> up(32);
    for (std::size_t i = 0; i < up.size(); ++i)
        up[i] = 1.0 + 1.0 / (1.0 + std::exp(-(static_cast<double>(i) - 13.3) / 2.0));
    std::vector<double> down(up.rbegin(), up.rend());
    Profile pu, pd;
    pu.values = up;
    pd.values = down;
    pu.pixel_pitch_nm = pd.pixel_pitch_nm = 300.0;
    const double a = boundary_from_threshold(pu, 1.5, 1.0).position_px;
    const double b = boundary_from_threshold(pd, 1.5, 1.0).position_px;
    CHECK(a + b == Catch::Approx(32.0).margin(1e-9));
}

TEST_CASE("boundary shift sign follows the weak side") {
    CHECK(boundary_shift_px(130.5, 128.0, WeakSide::none) == Catch::Approx(2.5));
    CHECK(boundary_shift_px(130.5, 128.0, WeakSide::right) == Catch::Approx(2.5));
    CHECK(boundary_shift_px(130.5, 128.0, WeakSide::left) == Catch::Approx(-2.5));
    CHECK(boundary_shift_px(126.0, 128.0, WeakSide::left) == Catch::Approx(2.0));

    const BoundaryEstimate e = boundary_from_threshold(
        profile_from({1.0, 1.0, 2.0, 2.0}), 1.5, 1.5, WeakSide::left, 1.0);
    CHECK(e.shift_px == Catch::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("convolution pushes the apparent boundary toward the weak side") {
    PhantomSpec spec;
    spec.width = 256;
    spec.height = 1;
    spec.boundary_px = 128.0;
    spec.left.magnitude = 5.0; // bright 1 ns region, weak side is the right
    const Phantom ph = make_phantom(spec);
    const Kernel k = gaussian_kernel(5.0, 1);
    const ComplexField blurred = convolve(ph.field, k, Boundary::reflect, Engine::fft);
    const Profile p = extract_profile(extract_lifetime(blurred), 0);
    const BoundaryEstimate e = boundary_from_threshold(p, 1.5, 128.0, WeakSide::right);
    CHECK(e.shift_px == Catch::Approx(6.093849).margin(1e-3));

    SECTION("equal magnitudes still shift toward the longer lifetime") {
        PhantomSpec eq = spec;
        eq.left.magnitude = 1.0;
        const ComplexField b2 =
            convolve(make_phantom(eq).field, k, Boundary::reflect, Engine::fft);
        const Profile p2 = extract_profile(extract_lifetime(b2), 0);
        const BoundaryEstimate e2 = boundary_from_threshold(p2, 1.5, 128.0, WeakSide::none);
        CHECK(e2.position_px == Catch::Approx(129.473869779).margin(1e-6));
    }
}

TEST_CASE("central region mask trims both axes") {
    const Mask m = central_region_mask(10, 10, 0.8);
    std::size_t count = 0;
    for (unsigned char v : m) count += v;
    CHECK(count == 64); // 8 x 8 survives
    CHECK(m(0, 5) == 0);
    CHECK(m(5, 0) == 0);
    CHECK(m(9, 5) == 0);
    CHECK(m(5, 5) == 1);
    CHECK(m(1, 1) == 1);
    CHECK(m(8, 8) == 1);

    const Mask full = central_region_mask(10, 1, 1.0);
    std::size_t all = 0;
    for (unsigned char v : full) all += v;
    CHECK(all == 10);
}

TEST_CASE("masked_defined drops NaN pixels from the mask") {
    LifetimeMap map{ScalarPlane(3, 1), 300.0};
    map.tau_ns[0] = 1.0;
    map.tau_ns[1] = std::nan("");
    map.tau_ns[2] = 2.0;
    const Mask m = masked_defined(map, central_region_mask(3, 1, 1.0));
    CHECK(m[0] == 1);
    CHECK(m[1] == 0);
    CHECK(m[2] == 1);
}

TEST_CASE("lifetime rmse") {
    PhantomSpec spec;
    spec.width = 20;
    spec.height = 10;
    spec.boundary_px = 10.0;
    const Phantom ph = make_phantom(spec);
    const Mask all = central_region_mask(20, 10, 1.0);

    SECTION("identical maps give zero") {
        CHECK(lifetime_rmse(ph.truth, ph.truth, all) == 0.0);
    }
    SECTION("a constant bias comes back exactly") {
        LifetimeMap biased = ph.truth;
        for (auto& v : biased.tau_ns) v += 0.1;
        CHECK(lifetime_rmse(biased, ph.truth, all) == Catch::Approx(0.1).epsilon(1e-12));
    }
    SECTION("only masked pixels count") {
        LifetimeMap biased = ph.truth;
        Mask one(20, 10);
        std::fill(one.data(), one.data() + one.size(), 0);
        one(3, 3) = 1;
        biased.tau_ns(3, 3) += 0.25;
        biased.tau_ns(4, 4) += 99.0; // outside the mask, must not matter
        CHECK(lifetime_rmse(biased, ph.truth, one) == Catch::Approx(0.25).epsilon(1e-12));
    }
    SECTION("an empty effective mask is an error") {
        Mask none(20, 10);
        std::fill(none.data(), none.data() + none.size(), 0);
        CHECK_THROWS_AS(lifetime_rmse(ph.truth, ph.truth, none), std::domain_error);
    }
    SECTION("shape mismatches are errors") {
        LifetimeMap small{ScalarPlane(5, 5), 300.0};
        CHECK_THROWS_AS(lifetime_rmse(small, ph.truth, all), std::domain_error);
    }
}

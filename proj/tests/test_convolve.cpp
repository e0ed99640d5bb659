#include <catch2/catch_amalgamated.hpp>

#include <flim/convolve.hpp>
#include <flim/kernel.hpp>
#include <flim/phasor.hpp>

#include <cmath>
#include <cstring>
#include <random>

using namespace flim;

namespace {

// Plain reference convolution written independently of the library code:
// out(x, y) = sum_k k(tx, ty) * f(x - (tx - rx), y - (ty - ry)) with the
// source index folded back by the boundary rule one step at a time.
long fold_reflect(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

long fold_periodic(long i, long n) {
    long m = i % n;
    return m < 0 ? m + n : m;
}

ScalarPlane reference_convolve(const ScalarPlane& f, const Kernel& k, Boundary b) {
    const long w = static_cast<long>(f.width());
    const long h = static_cast<long>(f.height());
    const long rx = static_cast<long>(k.radius_x());
    const long ry = static_cast<long>(k.radius_y());
    ScalarPlane out(f.width(), f.height());
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long ty = 0; ty < static_cast<long>(k.height); ++ty) {
                for (long tx = 0; tx < static_cast<long>(k.width); ++tx) {
                    long sx = x - (tx - rx);
                    long sy = y - (ty - ry);
                    sx = b == Boundary::reflect ? fold_reflect(sx, w) : fold_periodic(sx, w);
                    sy = b == Boundary::reflect ? fold_reflect(sy, h) : fold_periodic(sy, h);
                    acc += k.at(static_cast<std::size_t>(tx), static_cast<std::size_t>(ty)) *
                           f(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
                }
            }
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
        }
    }
    return out;
}

ScalarPlane random_plane(std::size_t w, std::size_t h, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    ScalarPlane p(w, h);
    for (auto& v : p) v = u(eng);
    return p;
}

double max_abs_diff(const ScalarPlane& a, const ScalarPlane& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const ScalarPlane& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double plane_sum(const ScalarPlane& a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}

} // namespace

TEST_CASE("delta kernel is the identity for the direct engine") {
    const ScalarPlane f = random_plane(31, 17, 11);
    const ScalarPlane out = convolve_direct(f, delta_kernel(), Boundary::reflect);
    REQUIRE(out.size() == f.size());
    CHECK(std::memcmp(out.data(), f.data(), f.size() * sizeof(double)) == 0);
}

TEST_CASE("constant fields pass through unchanged") {
    ScalarPlane f(40, 25);
    for (auto& v : f) v = 0.7983;
    const Kernel k = gaussian_kernel(3.0, 2);
    for (Boundary b : {Boundary::reflect, Boundary::periodic}) {
        for (Engine e : {Engine::direct, Engine::fft}) {
            const ScalarPlane out = convolve(f, k, b, e);
            for (double v : out)
                CHECK(v == Catch::Approx(0.7983).margin(1e-12));
        }
    }
}

TEST_CASE("direct engine matches an independent reference, asymmetric kernel") {
    // Small enough that edge handling dominates; asymmetric taps catch
    // orientation mistakes that a gaussian would mask.
    const ScalarPlane f = random_plane(7, 5, 23);
    const Kernel k = kernel_from_values(3, 3, {1.0, 2.0, 0.5,
                                               0.25, 4.0, 1.5,
                                               0.75, 1.0, 3.0});
    for (Boundary b : {Boundary::reflect, Boundary::periodic}) {
        const ScalarPlane ref = reference_convolve(f, k, b);
        CHECK(max_abs_diff(convolve_direct(f, k, b), ref) < 1e-14);
        FftConvolver fft(f.width(), f.height(), k, b);
        CHECK(max_abs_diff(fft.apply(f), ref) < 1e-12);
    }
}

TEST_CASE("reflected step profile, sigma 5") {
    // 1D step 1.0 -> 0.2 at x = 128, n = 256. Values pinned from the
    // reference implementation; the pair straddling the edge averages to
    // the midpoint of the step levels.
    ScalarPlane f(256, 1);
    for (std::size_t x = 0; x < 256; ++x) f[x] = x < 128 ? 1.0 : 0.2;
    const Kernel k = gaussian_kernel(5.0, 1);

    for (Engine e : {Engine::direct, Engine::fft}) {
        const ScalarPlane out = convolve(f, k, Boundary::reflect, e);
        CHECK(out[127] == Catch::Approx(0.6319166627551802).epsilon(1e-12));
        CHECK(out[128] == Catch::Approx(0.5680833372448197).epsilon(1e-12));
        CHECK(0.5 * (out[127] + out[128]) == Catch::Approx(0.6).margin(1e-12));
        // far from the edge the plateaus survive
        CHECK(out[10] == Catch::Approx(1.0).margin(1e-9));
        CHECK(out[245] == Catch::Approx(0.2).margin(1e-9));
    }
}

TEST_CASE("direct and fft engines agree on random fields") {
    struct Case { std::size_t w, h; double sigma; int dims; };
    for (const Case c : {Case{128, 128, 5.0, 2},
                         Case{97, 61, 3.0, 2},     // odd sizes exercise padding
                         Case{256, 1, 5.0, 1}}) {
        const ScalarPlane f = random_plane(c.w, c.h, 37 + c.w);
        const Kernel k = gaussian_kernel(c.sigma, c.dims);
        for (Boundary b : {Boundary::reflect, Boundary::periodic}) {
            const ScalarPlane d = convolve(f, k, b, Engine::direct);
            const ScalarPlane ff = convolve(f, k, b, Engine::fft);
            CHECK(max_abs_diff(d, ff) / max_abs(d) < 1e-6);
        }
    }
}

TEST_CASE("convolution is linear") {
    const ScalarPlane f1 = random_plane(48, 32, 5);
    const ScalarPlane f2 = random_plane(48, 32, 6);
    const Kernel k = gaussian_kernel(2.0, 2);
    ScalarPlane mix(48, 32);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 1.75 * f1[i] - 0.5 * f2[i];

    const ScalarPlane a = convolve(mix, k, Boundary::reflect, Engine::fft);
    const ScalarPlane b1 = convolve(f1, k, Boundary::reflect, Engine::fft);
    const ScalarPlane b2 = convolve(f2, k, Boundary::reflect, Engine::fft);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == Catch::Approx(1.75 * b1[i] - 0.5 * b2[i]).margin(1e-9));
}

TEST_CASE("periodic convolution conserves total flux") {
    const ScalarPlane f = random_plane(64, 48, 91);
    const Kernel k = gaussian_kernel(5.0, 2);
    const double in_sum = plane_sum(f);
    for (Engine e : {Engine::direct, Engine::fft}) {
        const ScalarPlane out = convolve(f, k, Boundary::periodic, e);
        CHECK(plane_sum(out) == Catch::Approx(in_sum).epsilon(1e-9));
    }
}

TEST_CASE("kernel wider than the field is rejected") {
    ScalarPlane f(16, 1);
    for (auto& v : f) v = 1.0;
    const Kernel k = gaussian_kernel(5.0, 1); // 41 taps
    CHECK_THROWS_AS(convolve(f, k, Boundary::reflect, Engine::direct), std::domain_error);
    CHECK_THROWS_AS(convolve(f, k, Boundary::reflect, Engine::fft), std::domain_error);
    CHECK_THROWS_WITH(convolve(f, k, Boundary::reflect, Engine::direct),
                      Catch::Matchers::ContainsSubstring("kernel"));
}

TEST_CASE("field convolution blurs each plane independently") {
    ComplexField field(30, 20, 300.0, 80.0);
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (auto& v : field.re) v = u(eng);
    for (auto& v : field.im) v = u(eng);

    const Kernel k = gaussian_kernel(1.5, 2);
    const ComplexField out = convolve(field, k, Boundary::reflect, Engine::fft);
    CHECK(max_abs_diff(out.re, convolve(field.re, k, Boundary::reflect, Engine::fft)) == 0.0);
    CHECK(max_abs_diff(out.im, convolve(field.im, k, Boundary::reflect, Engine::fft)) == 0.0);
    CHECK(out.pixel_pitch_nm == field.pixel_pitch_nm);
    CHECK(out.frequency_mhz == field.frequency_mhz);
}

TEST_CASE("fft convolver instances are reusable") {
    const Kernel k = gaussian_kernel(2.0, 2);
    FftConvolver conv(40, 40, k, Boundary::reflect);
    const ScalarPlane f1 = random_plane(40, 40, 1);
    const ScalarPlane f2 = random_plane(40, 40, 2);
    const ScalarPlane once = conv.apply(f1);
    conv.apply(f2); // interleaved use must not corrupt state
    const ScalarPlane again = conv.apply(f1);
    CHECK(std::memcmp(once.data(), again.data(), once.size() * sizeof(double)) == 0);
}

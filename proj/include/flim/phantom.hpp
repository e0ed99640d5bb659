#pragma once

// Two-fluorophore step phantoms and the noise/averaging machinery used to
// exercise the deconvolution pipeline. A phantom is a field split by a
// vertical interface: every pixel whose centre lies left of boundary_px
// carries the left fluorophore's complex response, the rest the right's.
// Pixel i spans [i, i+1), so its centre is i + 0.5 and an integer
// boundary_px = b puts pixels 0..b-1 on the left.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "flim/field.hpp"
#include "flim/lifetime.hpp"
#include "flim/phasor.hpp"
#include "flim/rng.hpp"

namespace flim {

struct PhantomSpec {
    std::size_t width = 260;
    std::size_t height = 260;      // 1 for line phantoms
    double boundary_px = 130.0;    // interface x coordinate
    Fluorophore left{1.0, 1.0};
    Fluorophore right{2.0, 1.0};
    double frequency_mhz = 80.0;
    double pixel_pitch_nm = 300.0;

    void validate() const {
        if (width < 2 || height < 1)
            throw std::domain_error("PhantomSpec: degenerate dimensions");
        if (!(boundary_px > 0.0) || !(boundary_px < static_cast<double>(width)))
            throw std::domain_error("PhantomSpec: boundary must lie inside the field");
        if (!(left.tau_ns >= 0.0) || !(right.tau_ns >= 0.0))
            throw std::domain_error("PhantomSpec: lifetimes must be nonnegative");
        if (!(left.magnitude >= 0.0) || !(right.magnitude >= 0.0))
            throw std::domain_error("PhantomSpec: magnitudes must be nonnegative");
        if (!(frequency_mhz > 0.0) || !(pixel_pitch_nm > 0.0))
            throw std::domain_error("PhantomSpec: frequency and pitch must be positive");
    }
};

struct Phantom {
    ComplexField field;
    LifetimeMap truth;
};

inline Phantom make_phantom(const PhantomSpec& spec) {
    spec.validate();
    const double omega = angular_frequency(spec.frequency_mhz);
    const std::complex<double> left = decay_phasor(spec.left.magnitude, spec.left.tau_ns, omega);
    const std::complex<double> right =
        decay_phasor(spec.right.magnitude, spec.right.tau_ns, omega);

    Phantom ph;
    ph.field = ComplexField(spec.width, spec.height, spec.pixel_pitch_nm, spec.frequency_mhz);
    ph.truth.pixel_pitch_nm = spec.pixel_pitch_nm;
    ph.truth.tau_ns = ScalarPlane(spec.width, spec.height);
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            const bool is_left = static_cast<double>(x) + 0.5 < spec.boundary_px;
            const std::complex<double>& v = is_left ? left : right;
            ph.field.re(x, y) = v.real();
            ph.field.im(x, y) = v.imag();
            ph.truth.tau_ns(x, y) = is_left ? spec.left.tau_ns : spec.right.tau_ns;
        }
    }
    return ph;
}

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double sigma = 0.05;           // additive std-dev (gaussian kind)
    std::uint64_t seed = 0;
    std::size_t realizations = 100;

    void validate() const {
        if (!(sigma >= 0.0))
            throw std::domain_error("NoiseSpec: sigma must be nonnegative");
        if (realizations < 1)
            throw std::domain_error("NoiseSpec: need at least one realization");
    }
};

// Additive i.i.d. Gaussian noise on both planes, real plane drawn first.
// sigma = 0 returns the input unchanged.
inline ComplexField add_gaussian_noise(const ComplexField& field, double sigma,
                                       std::uint64_t seed) {
    if (!(sigma >= 0.0))
        throw std::domain_error("add_gaussian_noise: sigma must be nonnegative");
    if (sigma == 0.0)
        return field;
    ComplexField out = field;
    GaussianStream gauss(seed);
    for (std::size_t p = 0; p < out.re.size(); ++p)
        out.re[p] += sigma * gauss.next();
    for (std::size_t p = 0; p < out.im.size(); ++p)
        out.im[p] += sigma * gauss.next();
    return out;
}

// Shot noise: scale so the field-wide peak maps to peak_counts, draw Poisson
// counts per pixel, scale back. Both planes share one scale so they stay
// commensurate. Real plane drawn first.
inline ComplexField add_poisson_noise(const ComplexField& field, double peak_counts,
                                      std::uint64_t seed) {
    if (!(peak_counts > 0.0))
        throw std::domain_error("add_poisson_noise: peak_counts must be positive");
    double peak = 0.0;
    for (std::size_t p = 0; p < field.re.size(); ++p) {
        if (field.re[p] < 0.0 || field.im[p] < 0.0)
            throw std::domain_error("add_poisson_noise: field must be non-negative");
        peak = std::max({peak, field.re[p], field.im[p]});
    }
    if (peak == 0.0)
        return field;
    const double scale = peak_counts / peak;
    ComplexField out = field;
    std::mt19937_64 eng(seed);
    for (std::size_t p = 0; p < out.re.size(); ++p)
        out.re[p] = static_cast<double>(poisson_sample(field.re[p] * scale, eng)) / scale;
    for (std::size_t p = 0; p < out.im.size(); ++p)
        out.im[p] = static_cast<double>(poisson_sample(field.im[p] * scale, eng)) / scale;
    return out;
}

// Clamp negative noise excursions to zero (deconvolution inputs must be
// non-negative).
inline ComplexField clamp_nonnegative(ComplexField field) {
    for (std::size_t p = 0; p < field.re.size(); ++p) {
        if (field.re[p] < 0.0) field.re[p] = 0.0;
        if (field.im[p] < 0.0) field.im[p] = 0.0;
    }
    return field;
}

// Peak-signal-to-noise in dB for additive noise of std-dev sigma on a
// signal of the given amplitude.
inline double snr_db(double signal_amplitude, double sigma) {
    if (!(signal_amplitude > 0.0) || !(sigma > 0.0))
        throw std::domain_error("snr_db: amplitude and sigma must be positive");
    return 20.0 * std::log10(signal_amplitude / sigma);
}

// Draw a noisy copy of `field` per the spec kind. Gaussian adds spec.sigma
// directly; the poisson kind maps sigma to peak_counts = 1/sigma^2, which
// gives the same relative noise at the field peak.
inline ComplexField add_noise(const ComplexField& field, const NoiseSpec& spec,
                              std::uint64_t seed) {
    if (spec.kind == NoiseKind::gaussian)
        return add_gaussian_noise(field, spec.sigma, seed);
    if (!(spec.sigma > 0.0))
        throw std::domain_error("add_noise: poisson kind needs sigma > 0");
    return add_poisson_noise(field, 1.0 / (spec.sigma * spec.sigma), seed);
}

// Mean over noise realizations of pipeline(noisy(field)). Realization r uses
// the seed derived from (spec.seed, r); accumulation runs in index order, so
// results are deterministic. A zero-noise spec short-circuits to a single
// pipeline run (all realizations would be identical).
inline ComplexField average_realizations(
    const std::function<ComplexField(const ComplexField&)>& pipeline,
    const ComplexField& field, const NoiseSpec& noise) {
    noise.validate();
    if (noise.kind == NoiseKind::gaussian && noise.sigma == 0.0)
        return pipeline(field);

    ComplexField sum(field.width(), field.height(), field.pixel_pitch_nm,
                     field.frequency_mhz);
    for (std::size_t r = 0; r < noise.realizations; ++r) {
        ComplexField out;
        try {
            out = pipeline(add_noise(field, noise, derive_seed(noise.seed, r)));
        } catch (const std::exception& e) {
            throw std::runtime_error("average_realizations: realization " +
                                     std::to_string(r) + " failed: " + e.what());
        }
        if (out.width() != field.width() || out.height() != field.height())
            throw std::runtime_error("average_realizations: realization " +
                                     std::to_string(r) + " changed the field shape");
        for (std::size_t p = 0; p < sum.re.size(); ++p) {
            sum.re[p] += out.re[p];
            sum.im[p] += out.im[p];
        }
    }
    const double inv = 1.0 / static_cast<double>(noise.realizations);
    for (std::size_t p = 0; p < sum.re.size(); ++p) {
        sum.re[p] *= inv;
        sum.im[p] *= inv;
    }
    return sum;
}

// Same protocol, but averaging the extracted lifetime maps instead of the
// complex fields. A pixel undefined in any realization stays undefined.
inline LifetimeMap average_lifetime_realizations(
    const std::function<ComplexField(const ComplexField&)>& pipeline,
    const ComplexField& field, const NoiseSpec& noise, double rel_floor = 1e-6) {
    noise.validate();
    if (noise.kind == NoiseKind::gaussian && noise.sigma == 0.0)
        return extract_lifetime(pipeline(field), rel_floor);

    LifetimeMap acc;
    acc.pixel_pitch_nm = field.pixel_pitch_nm;
    acc.tau_ns = ScalarPlane(field.width(), field.height());
    for (std::size_t r = 0; r < noise.realizations; ++r) {
        ComplexField out;
        try {
            out = pipeline(add_noise(field, noise, derive_seed(noise.seed, r)));
        } catch (const std::exception& e) {
            throw std::runtime_error("average_lifetime_realizations: realization " +
                                     std::to_string(r) + " failed: " + e.what());
        }
        const LifetimeMap map = extract_lifetime(out, rel_floor);
        for (std::size_t p = 0; p < acc.tau_ns.size(); ++p)
            acc.tau_ns[p] += map.tau_ns[p]; // NaN propagates by design
    }
    const double inv = 1.0 / static_cast<double>(noise.realizations);
    for (std::size_t p = 0; p < acc.tau_ns.size(); ++p)
        acc.tau_ns[p] *= inv;
    return acc;
}

} // namespace flim

#pragma once

// Frequency-domain phasor math for single-exponential fluorescence decays.
//
// A decay with lifetime tau probed at angular frequency w has the complex
// response A * (1 + i*w*tau)^-1, i.e.
//   re = A / (1 + (w*tau)^2),   im = A * w*tau / (1 + (w*tau)^2).
// For A = 1 the point (re, im) lies on the universal semicircle
// (re - 1/2)^2 + im^2 = 1/4. Mixtures of decays add as complex numbers.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace flim {

// One emitting species: lifetime plus emission strength (concentration
// times cross-section folded into a single magnitude).
struct Fluorophore {
    double tau_ns = 0.0;
    double magnitude = 1.0;
};

// Angular frequency in rad/ns for a modulation frequency given in MHz.
// 1 MHz = 1e-3 GHz, and lifetimes are in ns, so w = 2*pi*f[GHz].
inline double angular_frequency(double freq_mhz) {
    if (!(freq_mhz > 0.0))
        throw std::invalid_argument("angular_frequency: frequency must be positive");
    return 2.0 * std::numbers::pi * freq_mhz * 1e-3;
}

// Phasor of a single-exponential decay with amplitude A and lifetime tau [ns].
inline std::complex<double> decay_phasor(double amplitude, double tau_ns, double omega) {
    if (!(tau_ns >= 0.0))
        throw std::invalid_argument("decay_phasor: lifetime must be nonnegative");
    const double wt = omega * tau_ns;
    const double den = 1.0 + wt * wt;
    return {amplitude / den, amplitude * wt / den};
}

// Amplitude-weighted sum of single-exponential phasors: complex responses
// of co-located emitters add linearly. Empty list gives (0, 0).
inline std::complex<double> mixture_sample(std::span<const Fluorophore> emitters,
                                           double omega) {
    std::complex<double> sum{0.0, 0.0};
    for (const Fluorophore& e : emitters) {
        if (!(e.magnitude >= 0.0))
            throw std::invalid_argument("mixture_sample: magnitude must be nonnegative");
        sum += decay_phasor(e.magnitude, e.tau_ns, omega);
    }
    return sum;
}

// Phase lifetime tau_phi = tan(phase) / w = im / (w * re).
// Amplitude cancels, so this works for unnormalized phasors.
// Returns NaN when |re| is at or below rel_floor * ref_magnitude (phase undefined).
inline double phase_lifetime(std::complex<double> p, double omega,
                             double ref_magnitude = 1.0, double rel_floor = 1e-6) {
    const double floor = rel_floor * ref_magnitude;
    if (!(std::abs(p.real()) > floor))
        return std::numeric_limits<double>::quiet_NaN();
    return p.imag() / (omega * p.real());
}

// Modulation lifetime tau_m = (1/w) * sqrt(A^2 / |p|^2 - 1) for a phasor of
// known total amplitude A. For a pure decay this equals the true lifetime;
// for mixtures it generally differs from the phase lifetime.
inline double modulation_lifetime(std::complex<double> p, double omega, double amplitude) {
    const double m2 = std::norm(p);
    if (!(m2 > 0.0) || !(amplitude > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    const double arg = amplitude * amplitude / m2 - 1.0;
    if (arg < 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(arg) / omega;
}

// Squared distance from the universal semicircle centre definition:
// for a normalized phasor g + i*s this is (g - 1/2)^2 + s^2, which equals
// 1/4 exactly when the decay is single-exponential.
inline double semicircle_radius_sq(std::complex<double> normalized) {
    const double g = normalized.real() - 0.5;
    return g * g + normalized.imag() * normalized.imag();
}

} // namespace flim

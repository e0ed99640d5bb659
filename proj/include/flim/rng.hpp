#pragma once

// Seeded random number generation with the algorithms pinned down, so a
// recorded seed reproduces output bit-for-bit on any platform this builds
// on. Uniforms come from mt19937_64, per-realization seeds from a splitmix64
// mix of (base seed, counter), Gaussians from Box-Muller, and Poisson counts
// from Knuth's product method (small mean) or Hörmann's PTRS transformed
// rejection (large mean). The algorithm names are recorded in run manifests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace flim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed for realization `counter` of a run with the given base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t state = base + counter * 0x9E3779B97F4A7C15ull;
    return splitmix64(state);
}

// Uniform on (0, 1]: the +1 keeps log() safe at the low end.
inline double uniform_pos(std::mt19937_64& eng) {
    return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

// Uniform on [0, 1).
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, one engine draw pair per two variates.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos(eng_);
        const double u2 = uniform01(eng_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Poisson-distributed count with the given mean.
inline std::int64_t poisson_sample(double mean, std::mt19937_64& eng) {
    if (!(mean >= 0.0))
        throw std::domain_error("poisson_sample: mean must be non-negative");
    if (mean == 0.0)
        return 0;

    if (mean < 10.0) {
        // Knuth's product method.
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform_pos(eng);
        } while (p > limit);
        return k - 1;
    }

    // PTRS transformed rejection (Hörmann 1993).
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = uniform_pos(eng) - 0.5;
        const double v = uniform_pos(eng);
        const double us = 0.5 - std::abs(u);
        if (us <= 0.0)
            continue;
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            kf * log_mean - mean - std::lgamma(kf + 1.0))
            return static_cast<std::int64_t>(kf);
    }
}

} // namespace flim

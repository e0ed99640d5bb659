#pragma once

// Discrete PSF kernels. A kernel is a unit-sum weight grid with odd extent
// along each axis so it has a well-defined centre tap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flim {

struct Kernel {
    std::size_t width = 1;
    std::size_t height = 1;
    double sigma_px = 0.0; // Gaussian width used to build it; 0 for custom kernels
    std::vector<double> values; // row-major, normalized to unit sum

    std::size_t radius_x() const { return (width - 1) / 2; }
    std::size_t radius_y() const { return (height - 1) / 2; }

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

// Wrap raw weights as a kernel. Weights must be non-negative and not all
// zero; they are renormalized so the taps sum to exactly 1.
inline Kernel kernel_from_values(std::size_t width, std::size_t height,
                                 std::vector<double> weights) {
    if (width == 0 || height == 0 || width % 2 == 0 || height % 2 == 0)
        throw std::domain_error("kernel_from_values: extent must be odd and nonzero");
    if (weights.size() != width * height)
        throw std::domain_error("kernel_from_values: weight count does not match extent");
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw std::domain_error("kernel_from_values: weights must be finite and non-negative");
        sum += w;
    }
    if (!(sum > 0.0))
        throw std::domain_error("kernel_from_values: weights sum to zero");
    for (double& w : weights)
        w /= sum;
    Kernel k;
    k.width = width;
    k.height = height;
    k.values = std::move(weights);
    return k;
}

// Identity kernel: a single unit tap.
inline Kernel delta_kernel() {
    Kernel k;
    k.values = {1.0};
    return k;
}

// Isotropic Gaussian, truncated at radius ceil(4*sigma) and renormalized.
// dims = 1 gives a horizontal 1-row kernel, dims = 2 the separable product.
inline Kernel gaussian_kernel(double sigma_px, int dims = 2) {
    if (!(sigma_px > 0.0))
        throw std::domain_error("gaussian_kernel: sigma must be positive");
    if (dims != 1 && dims != 2)
        throw std::domain_error("gaussian_kernel: dims must be 1 or 2");

    const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma_px));
    const std::size_t taps = 2 * radius + 1;
    std::vector<double> line(taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps; ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        line[i] = std::exp(-d * d / (2.0 * sigma_px * sigma_px));
        sum += line[i];
    }
    for (double& v : line)
        v /= sum;

    Kernel k;
    k.sigma_px = sigma_px;
    if (dims == 1) {
        k.width = taps;
        k.height = 1;
        k.values = std::move(line);
    } else {
        k.width = taps;
        k.height = taps;
        k.values.resize(taps * taps);
        double total = 0.0;
        for (std::size_t y = 0; y < taps; ++y)
            for (std::size_t x = 0; x < taps; ++x)
                total += (k.values[y * taps + x] = line[y] * line[x]);
        for (double& v : k.values)
            v /= total; // absorb rounding dust so the sum is exactly renormalized
    }
    return k;
}

// Reverse the kernel along every axis: h(s) -> h(-s). Reversing the flat
// row-major buffer flips both axes at once. Involution, bitwise.
inline Kernel mirror(Kernel k) {
    std::reverse(k.values.begin(), k.values.end());
    return k;
}

inline double kernel_sum(const Kernel& k) {
    double s = 0.0;
    for (double v : k.values)
        s += v;
    return s;
}

} // namespace flim

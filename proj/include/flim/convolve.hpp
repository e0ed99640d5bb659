#pragma once

// 2D convolution of scalar planes with a PSF kernel, in true convolution
// orientation:
//
//   out[y][x] = sum_{ty,tx} k[ty][tx] * f[y - (ty - ry)][x - (tx - rx)]
//
// Out-of-range samples are resolved by the boundary policy: `reflect`
// mirrors about the edge (index -1 maps to 0, index n to n-1) and
// `periodic` wraps modulo the extent.
//
// Two engines compute the same sum. `direct` evaluates it literally and is
// the reference; `fft` pads to an FFTW-friendly size, multiplies spectra,
// and crops, with the kernel spectrum cached so repeated convolutions of
// same-shaped planes (the deconvolution inner loop) cost two transforms.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flim/fft.hpp"
#include "flim/field.hpp"
#include "flim/kernel.hpp"
#include "flim/plane.hpp"

namespace flim {

enum class Boundary { reflect, periodic };
enum class Engine { direct, fft };

namespace detail {

inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i - 1;
        if (i >= n)
            i = 2 * n - i - 1;
    }
    return i;
}

inline std::ptrdiff_t wrap_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline void check_kernel_fits(const Kernel& k, std::size_t width, std::size_t height) {
    if (k.width > width || k.height > height)
        throw std::domain_error("convolve: kernel larger than field extent");
}

} // namespace detail

inline ScalarPlane convolve_direct(const ScalarPlane& f, const Kernel& k, Boundary boundary) {
    detail::check_kernel_fits(k, f.width(), f.height());
    const auto w = static_cast<std::ptrdiff_t>(f.width());
    const auto h = static_cast<std::ptrdiff_t>(f.height());
    const auto rx = static_cast<std::ptrdiff_t>(k.radius_x());
    const auto ry = static_cast<std::ptrdiff_t>(k.radius_y());
    const auto resolve = boundary == Boundary::reflect ? detail::reflect_index
                                                       : detail::wrap_index;

    ScalarPlane out(f.width(), f.height());
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t ty = 0; ty < static_cast<std::ptrdiff_t>(k.height); ++ty) {
                const std::ptrdiff_t sy = resolve(y - (ty - ry), h);
                for (std::ptrdiff_t tx = 0; tx < static_cast<std::ptrdiff_t>(k.width); ++tx) {
                    const std::ptrdiff_t sx = resolve(x - (tx - rx), w);
                    acc += k.values[static_cast<std::size_t>(ty) * k.width +
                                    static_cast<std::size_t>(tx)] *
                           f(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
                }
            }
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
        }
    }
    return out;
}

// FFT-engine convolver for a fixed plane shape, kernel, and boundary policy.
// Construction plans the transforms and caches the kernel spectrum; apply()
// then costs one forward and one inverse transform. Instances hold scratch
// buffers, so share one per thread, not across threads.
class FftConvolver {
public:
    FftConvolver(std::size_t width, std::size_t height, const Kernel& k, Boundary boundary)
        : width_(width), height_(height), boundary_(boundary),
          rx_(k.radius_x()), ry_(k.radius_y()),
          pad_w_(boundary == Boundary::reflect ? next_fast_size(width + 2 * k.radius_x())
                                               : width),
          pad_h_(boundary == Boundary::reflect ? next_fast_size(height + 2 * k.radius_y())
                                               : height),
          fft_(pad_w_, pad_h_), kernel_spec_(fft_.spec_size()) {
        detail::check_kernel_fits(k, width, height);

        // Embed the kernel with its centre tap at the padded origin; taps
        // left/above the centre wrap to the far end of each padded axis.
        double* buf = fft_.real();
        std::fill(buf, buf + fft_.real_size(), 0.0);
        for (std::size_t ty = 0; ty < k.height; ++ty) {
            const std::size_t py = static_cast<std::size_t>(detail::wrap_index(
                static_cast<std::ptrdiff_t>(ty) - static_cast<std::ptrdiff_t>(ry_),
                static_cast<std::ptrdiff_t>(pad_h_)));
            for (std::size_t tx = 0; tx < k.width; ++tx) {
                const std::size_t px = static_cast<std::size_t>(detail::wrap_index(
                    static_cast<std::ptrdiff_t>(tx) - static_cast<std::ptrdiff_t>(rx_),
                    static_cast<std::ptrdiff_t>(pad_w_)));
                buf[py * pad_w_ + px] = k.values[ty * k.width + tx];
            }
        }
        fft_.forward();
        const std::complex<double>* spec = fft_.spectrum();
        const double scale = 1.0 / (static_cast<double>(pad_w_) * static_cast<double>(pad_h_));
        for (std::size_t i = 0; i < kernel_spec_.size(); ++i)
            kernel_spec_[i] = spec[i] * scale; // fold in FFTW's normalization

    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }

    ScalarPlane apply(const ScalarPlane& f) {
        if (f.width() != width_ || f.height() != height_)
            throw std::invalid_argument("FftConvolver: plane shape does not match");

        double* buf = fft_.real();
        if (boundary_ == Boundary::periodic) {
            std::copy(f.data(), f.data() + f.size(), buf);
        } else {
            std::fill(buf, buf + fft_.real_size(), 0.0);
            const auto w = static_cast<std::ptrdiff_t>(width_);
            const auto h = static_cast<std::ptrdiff_t>(height_);
            for (std::size_t py = 0; py < height_ + 2 * ry_; ++py) {
                const auto sy = static_cast<std::size_t>(detail::reflect_index(
                    static_cast<std::ptrdiff_t>(py) - static_cast<std::ptrdiff_t>(ry_), h));
                const double* src = f.data() + sy * width_;
                double* dst = buf + py * pad_w_;
                for (std::size_t px = 0; px < width_ + 2 * rx_; ++px) {
                    const auto sx = static_cast<std::size_t>(detail::reflect_index(
                        static_cast<std::ptrdiff_t>(px) - static_cast<std::ptrdiff_t>(rx_), w));
                    dst[px] = src[sx];
                }
            }
        }

        fft_.forward();
        std::complex<double>* spec = fft_.spectrum();
        for (std::size_t i = 0; i < kernel_spec_.size(); ++i)
            spec[i] *= kernel_spec_[i];
        fft_.inverse();

        // Valid region starts at the pad offset (reflect) or at 0 (periodic).
        const std::size_t ox = boundary_ == Boundary::periodic ? 0 : rx_;
        const std::size_t oy = boundary_ == Boundary::periodic ? 0 : ry_;
        ScalarPlane out(width_, height_);
        for (std::size_t y = 0; y < height_; ++y) {
            const double* src = fft_.real() + (y + oy) * pad_w_ + ox;
            std::copy(src, src + width_, out.data() + y * width_);
        }
        return out;
    }

private:
    std::size_t width_;
    std::size_t height_;
    Boundary boundary_;
    std::size_t rx_;
    std::size_t ry_;
    std::size_t pad_w_;
    std::size_t pad_h_;
    Rfft2 fft_;
    std::vector<std::complex<double>> kernel_spec_;
};

inline ScalarPlane convolve(const ScalarPlane& f, const Kernel& k,
                            Boundary boundary = Boundary::reflect,
                            Engine engine = Engine::fft) {
    if (engine == Engine::direct)
        return convolve_direct(f, k, boundary);
    FftConvolver conv(f.width(), f.height(), k, boundary);
    return conv.apply(f);
}

// Convolve both planes of a field with the same kernel.
inline ComplexField convolve(const ComplexField& field, const Kernel& k,
                             Boundary boundary = Boundary::reflect,
                             Engine engine = Engine::fft) {
    detail::check_kernel_fits(k, field.width(), field.height());
    ComplexField out = field;
    if (engine == Engine::direct) {
        out.re = convolve_direct(field.re, k, boundary);
        out.im = convolve_direct(field.im, k, boundary);
    } else {
        FftConvolver conv(field.width(), field.height(), k, boundary);
        out.re = conv.apply(field.re);
        out.im = conv.apply(field.im);
    }
    return out;
}

} // namespace flim

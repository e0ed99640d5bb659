#pragma once

// A complex-valued frequency-domain image: per-pixel real and imaginary
// planes plus the physical metadata needed to interpret them.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "flim/plane.hpp"

namespace flim {

struct ComplexField {
    ScalarPlane re;
    ScalarPlane im;
    double pixel_pitch_nm = 0.0;
    double frequency_mhz = 0.0;

    ComplexField() = default;

    ComplexField(std::size_t width, std::size_t height,
                 double pitch_nm, double freq_mhz)
        : re(width, height), im(width, height),
          pixel_pitch_nm(pitch_nm), frequency_mhz(freq_mhz) {
        check_metadata();
    }

    std::size_t width() const { return re.width(); }
    std::size_t height() const { return re.height(); }
    std::size_t size() const { return re.size(); }

    std::complex<double> at(std::size_t x, std::size_t y) const {
        return {re(x, y), im(x, y)};
    }

    void check_metadata() const {
        if (!(pixel_pitch_nm > 0.0))
            throw std::invalid_argument("ComplexField: pixel pitch must be positive");
        if (!(frequency_mhz > 0.0))
            throw std::invalid_argument("ComplexField: frequency must be positive");
    }

    // Full invariant check: matching plane shapes and finite values.
    void validate() const {
        check_metadata();
        if (!re.same_shape(im))
            throw std::invalid_argument("ComplexField: re/im plane shapes differ");
        for (std::size_t i = 0; i < re.size(); ++i) {
            if (!std::isfinite(re[i]) || !std::isfinite(im[i]))
                throw std::invalid_argument(
                    "ComplexField: non-finite value at index " + std::to_string(i));
        }
    }
};

} // namespace flim

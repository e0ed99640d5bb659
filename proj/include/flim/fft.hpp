#pragma once

// Thin RAII wrapper around FFTW's out-of-place r2c/c2r transform pair for a
// fixed 2D size. Plans are created with FFTW_ESTIMATE on purpose: ESTIMATE
// picks the plan deterministically, so repeated runs produce bit-identical
// output (FFTW_MEASURE times candidate plans and can pick differently from
// run to run). Plan creation/destruction is serialized behind a mutex
// because those FFTW entry points are not thread-safe.

#include <complex>
#include <cstddef>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace flim {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

// Smallest size >= n whose prime factors are all in {2, 3, 5, 7} — sizes
// FFTW handles with fast codelets.
inline std::size_t next_fast_size(std::size_t n) {
    if (n == 0)
        return 1;
    for (;; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (m % p == 0)
                m /= p;
        if (m == 1)
            return n;
    }
}

class Rfft2 {
public:
    Rfft2(std::size_t width, std::size_t height)
        : width_(width), height_(height), spec_width_(width / 2 + 1) {
        if (width == 0 || height == 0)
            throw std::invalid_argument("Rfft2: dimensions must be nonzero");
        real_ = fftw_alloc_real(height_ * width_);
        spec_ = fftw_alloc_complex(height_ * spec_width_);
        if (!real_ || !spec_) {
            release();
            throw std::bad_alloc();
        }
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(height_), static_cast<int>(width_),
                                    real_, spec_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(static_cast<int>(height_), static_cast<int>(width_),
                                    spec_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !inv_) {
            release_plans_locked();
            release();
            throw std::runtime_error("Rfft2: FFTW plan creation failed");
        }
    }

    Rfft2(const Rfft2&) = delete;
    Rfft2& operator=(const Rfft2&) = delete;

    ~Rfft2() {
        {
            std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
            release_plans_locked();
        }
        release();
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t real_size() const { return width_ * height_; }
    std::size_t spec_size() const { return spec_width_ * height_; }

    double* real() { return real_; }
    std::complex<double>* spectrum() {
        // fftw_complex is double[2]; std::complex<double> matches that layout
        return reinterpret_cast<std::complex<double>*>(spec_);
    }

    void forward() { fftw_execute(fwd_); }

    // c2r overwrites the spectrum buffer; the result is unnormalized
    // (scaled by width*height), as FFTW leaves it.
    void inverse() { fftw_execute(inv_); }

private:
    void release_plans_locked() {
        if (fwd_) fftw_destroy_plan(fwd_);
        if (inv_) fftw_destroy_plan(inv_);
        fwd_ = inv_ = nullptr;
    }
    void release() {
        if (real_) fftw_free(real_);
        if (spec_) fftw_free(spec_);
        real_ = nullptr;
        spec_ = nullptr;
    }

    std::size_t width_;
    std::size_t height_;
    std::size_t spec_width_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

} // namespace flim

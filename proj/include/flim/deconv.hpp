#pragma once

// Richardson-Lucy deconvolution with optional total-variation regularization,
// applied independently to the real and imaginary planes of a field.
//
// Plain RL update:
//   o_{k+1} = { i / max(o_k * h, eps_div)  *  h(-s) } . o_k
// ('*' convolution, '.' elementwise product). The TV variant multiplies the
// update by 1 / max(1 - lambda * div(grad o_k / |grad o_k|), denom_floor),
// where the gradient uses forward differences with edge replication (so the
// last difference along each axis is 0), |grad o| = sqrt(gx^2+gy^2+eps_tv^2),
// and the divergence uses backward differences with a zero left pad. That
// pairing makes the divergence the negative adjoint of the gradient.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flim/convolve.hpp"
#include "flim/field.hpp"
#include "flim/kernel.hpp"
#include "flim/plane.hpp"

namespace flim {

struct DeconvConfig {
    std::size_t iterations = 50;
    double lambda = 0.005;   // TV weight; 0 disables regularization exactly
    double eps_div = 1e-12;  // floor for the RL ratio denominator
    double eps_tv = 1e-8;    // gradient-magnitude floor inside the TV term
    double denom_floor = 0.1; // clamp for the TV denominator
    Boundary boundary = Boundary::reflect;
    Engine engine = Engine::fft;

    void validate() const {
        if (iterations < 1)
            throw std::domain_error("DeconvConfig: iterations must be >= 1");
        if (!(lambda >= 0.0))
            throw std::domain_error("DeconvConfig: lambda must be >= 0");
        if (!(eps_div > 0.0) || !(eps_tv > 0.0))
            throw std::domain_error("DeconvConfig: guards must be positive");
        if (!(denom_floor > 0.0) || denom_floor > 1.0)
            throw std::domain_error("DeconvConfig: denom_floor must be in (0, 1]");
    }
};

struct IterationStat {
    double residual_l2;     // || i - o_k * h ||_2 after the iteration
    double max_rel_change;  // max |o_k - o_{k-1}| / max(|o_{k-1}|, eps_div)
};

using ConvergenceTrace = std::vector<IterationStat>;

struct DeconvResult {
    ComplexField field;
    ConvergenceTrace trace_re;
    ConvergenceTrace trace_im;
};

// TV correction factor evaluated on the current estimate. Pure function of
// the plane and the config guards.
inline ScalarPlane tv_factor(const ScalarPlane& o, const DeconvConfig& cfg) {
    const std::size_t w = o.width();
    const std::size_t h = o.height();
    ScalarPlane nx(w, h), ny(w, h);
    const double eps2 = cfg.eps_tv * cfg.eps_tv;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double gx = x + 1 < w ? o(x + 1, y) - o(x, y) : 0.0;
            const double gy = y + 1 < h ? o(x, y + 1) - o(x, y) : 0.0;
            const double mag = std::sqrt(gx * gx + gy * gy + eps2);
            nx(x, y) = gx / mag;
            ny(x, y) = gy / mag;
        }
    }
    ScalarPlane factor(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double div = (nx(x, y) - (x > 0 ? nx(x - 1, y) : 0.0)) +
                               (ny(x, y) - (y > 0 ? ny(x, y - 1) : 0.0));
            factor(x, y) = 1.0 / std::max(1.0 - cfg.lambda * div, cfg.denom_floor);
        }
    }
    return factor;
}

// Iteration engine for a fixed plane shape and kernel. Plans and kernel
// spectra are built once, so repeated runs (noise realizations) and both
// field planes reuse them. Holds scratch state: one instance per thread.
class Deconvolver {
public:
    Deconvolver(std::size_t width, std::size_t height, const Kernel& k, DeconvConfig cfg)
        : cfg_(cfg), kernel_(k), mirrored_(mirror(k)) {
        cfg_.validate();
        detail::check_kernel_fits(k, width, height);
        if (std::abs(kernel_sum(k) - 1.0) > 1e-9)
            throw std::domain_error("Deconvolver: kernel is not normalized");
        if (cfg_.engine == Engine::fft) {
            conv_k_.emplace(width, height, kernel_, cfg_.boundary);
            conv_km_.emplace(width, height, mirrored_, cfg_.boundary);
        }
    }

    const DeconvConfig& config() const { return cfg_; }

    ScalarPlane blur(const ScalarPlane& o) {
        return conv_k_ ? conv_k_->apply(o) : convolve_direct(o, kernel_, cfg_.boundary);
    }

    ScalarPlane correlate(const ScalarPlane& r) {
        return conv_km_ ? conv_km_->apply(r) : convolve_direct(r, mirrored_, cfg_.boundary);
    }

    // One plain RL update from estimate o given measured data i.
    ScalarPlane rl_step(const ScalarPlane& o, const ScalarPlane& i) {
        require_nonnegative(o, "estimate");
        require_nonnegative(i, "measured");
        return rl_step_unchecked(o, i, blur(o));
    }

    // One RL update followed by the TV correction evaluated at o.
    ScalarPlane rl_tv_step(const ScalarPlane& o, const ScalarPlane& i) {
        ScalarPlane next = rl_step(o, i);
        const ScalarPlane factor = tv_factor(o, cfg_);
        for (std::size_t p = 0; p < next.size(); ++p)
            next[p] *= factor[p];
        return next;
    }

    // Full iteration loop: o_0 = measured, cfg.iterations RL-TV updates.
    // The blur of the new estimate doubles as next iteration's denominator
    // and as the residual term, so each iteration costs two convolutions.
    ScalarPlane run_plane(const ScalarPlane& measured, ConvergenceTrace* trace = nullptr) {
        require_nonnegative(measured, "measured");
        if (trace) {
            trace->clear();
            trace->reserve(cfg_.iterations);
        }
        ScalarPlane o = measured;
        ScalarPlane blurred = blur(o);
        for (std::size_t it = 0; it < cfg_.iterations; ++it) {
            ScalarPlane next = rl_step_unchecked(o, measured, blurred);
            if (cfg_.lambda > 0.0) {
                const ScalarPlane factor = tv_factor(o, cfg_);
                for (std::size_t p = 0; p < next.size(); ++p)
                    next[p] *= factor[p];
            }
            blurred = blur(next);
            if (trace) {
                double res2 = 0.0;
                double max_rel = 0.0;
                for (std::size_t p = 0; p < next.size(); ++p) {
                    const double r = measured[p] - blurred[p];
                    res2 += r * r;
                    const double rel = std::abs(next[p] - o[p]) /
                                       std::max(std::abs(o[p]), cfg_.eps_div);
                    max_rel = std::max(max_rel, rel);
                }
                trace->push_back({std::sqrt(res2), max_rel});
            }
            o = std::move(next);
        }
        return o;
    }

    // Deconvolve both planes of a field. Values in [-eps_div, 0) are treated
    // as roundoff and clamped to zero; anything more negative is rejected.
    DeconvResult run(const ComplexField& measured) {
        ComplexField in = measured;
        clamp_small_negatives(in.re);
        clamp_small_negatives(in.im);
        DeconvResult result;
        result.field = in;
        result.field.re = run_plane(in.re, &result.trace_re);
        result.field.im = run_plane(in.im, &result.trace_im);
        return result;
    }

private:
    ScalarPlane rl_step_unchecked(const ScalarPlane& o, const ScalarPlane& i,
                                  const ScalarPlane& blurred_o) {
        ScalarPlane ratio(o.width(), o.height());
        for (std::size_t p = 0; p < ratio.size(); ++p)
            ratio[p] = i[p] / std::max(blurred_o[p], cfg_.eps_div);
        ScalarPlane next = correlate(ratio);
        for (std::size_t p = 0; p < next.size(); ++p)
            next[p] *= o[p];
        return next;
    }

    void require_nonnegative(const ScalarPlane& p, const char* what) const {
        for (std::size_t q = 0; q < p.size(); ++q)
            if (!(p[q] >= 0.0))
                throw std::domain_error(std::string("Deconvolver: negative or non-finite ") +
                                        what + " plane value");
    }

    void clamp_small_negatives(ScalarPlane& p) const {
        for (std::size_t q = 0; q < p.size(); ++q) {
            if (p[q] < 0.0) {
                if (p[q] < -cfg_.eps_div)
                    throw std::domain_error(
                        "Deconvolver: plane value below the negative tolerance");
                p[q] = 0.0;
            }
        }
    }

    DeconvConfig cfg_;
    Kernel kernel_;
    Kernel mirrored_;
    std::optional<FftConvolver> conv_k_;
    std::optional<FftConvolver> conv_km_;
};

// One-shot conveniences over the class above.

inline ScalarPlane rl_step(const ScalarPlane& o, const ScalarPlane& i, const Kernel& k,
                           const DeconvConfig& cfg = {}) {
    Deconvolver d(o.width(), o.height(), k, cfg);
    return d.rl_step(o, i);
}

inline ScalarPlane rl_tv_step(const ScalarPlane& o, const ScalarPlane& i, const Kernel& k,
                              const DeconvConfig& cfg = {}) {
    Deconvolver d(o.width(), o.height(), k, cfg);
    return d.rl_tv_step(o, i);
}

inline ScalarPlane deconvolve_plane(const ScalarPlane& measured, const Kernel& k,
                                    const DeconvConfig& cfg = {},
                                    ConvergenceTrace* trace = nullptr) {
    Deconvolver d(measured.width(), measured.height(), k, cfg);
    return d.run_plane(measured, trace);
}

inline DeconvResult deconvolve_field(const ComplexField& measured, const Kernel& k,
                                     const DeconvConfig& cfg = {}) {
    Deconvolver d(measured.width(), measured.height(), k, cfg);
    return d.run(measured);
}

} // namespace flim

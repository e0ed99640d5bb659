#pragma once

// Boundary localization and lifetime-error metrics.
//
// Profiles follow the pixel-cell convention used by the phantoms: sample i
// sits at coordinate x = i + 0.5 (pixel i spans [i, i+1)), so an ideal step
// whose first high pixel is index b crosses the mid-threshold exactly at
// coordinate b — the phantom's interface position.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "flim/field.hpp"
#include "flim/lifetime.hpp"
#include "flim/plane.hpp"

namespace flim {

struct Profile {
    std::vector<double> values;    // sample i at x = i + 0.5 px
    double pixel_pitch_nm = 0.0;
};

struct BoundaryEstimate {
    double position_px = 0.0;
    double position_nm = 0.0;
    // Signed offset from the true interface; filled by boundary_shift once
    // the truth and orientation are known.
    double shift_px = std::numeric_limits<double>::quiet_NaN();
};

// Which side of the interface holds the weaker fluorophore. Shifts are
// reported positive toward the weak side.
enum class WeakSide { none, left, right };

inline Profile extract_profile(const ScalarPlane& plane, std::size_t row,
                               double pixel_pitch_nm) {
    if (row >= plane.height())
        throw std::out_of_range("extract_profile: row " + std::to_string(row) +
                                " outside height " + std::to_string(plane.height()));
    Profile p;
    p.pixel_pitch_nm = pixel_pitch_nm;
    p.values.assign(plane.data() + row * plane.width(),
                    plane.data() + (row + 1) * plane.width());
    return p;
}

inline Profile extract_profile(const LifetimeMap& map, std::size_t row) {
    return extract_profile(map.tau_ns, row, map.pixel_pitch_nm);
}

// Subpixel threshold crossing of a profile, restricted to the central
// `fraction` of the axis to keep boundary-handling artifacts out. Exactly
// one crossing must exist there; NaN samples are skipped. A sample equal to
// the threshold is attributed to the segment ending at it.
inline BoundaryEstimate boundary_from_threshold(const Profile& profile, double threshold,
                                                double central_fraction = 0.8) {
    const std::size_t n = profile.values.size();
    if (n < 2)
        throw std::domain_error("boundary_from_threshold: profile too short");
    if (!(central_fraction > 0.0) || central_fraction > 1.0)
        throw std::domain_error("boundary_from_threshold: central fraction out of range");

    const auto trim = static_cast<std::size_t>(
        std::floor((1.0 - central_fraction) / 2.0 * static_cast<double>(n)));
    const std::size_t lo = trim;
    const std::size_t hi = n - trim;

    std::size_t count = 0;
    double position = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        const double a = profile.values[i] - threshold;
        const double b = profile.values[i + 1] - threshold;
        if (std::isnan(a) || std::isnan(b))
            continue;
        const bool crossing = (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0);
        if (!crossing)
            continue;
        ++count;
        const double f = (threshold - profile.values[i]) /
                         (profile.values[i + 1] - profile.values[i]);
        position = static_cast<double>(i) + 0.5 + f;
    }
    if (count != 1)
        throw std::domain_error("boundary_from_threshold: expected exactly one threshold "
                                "crossing in the central region, found " +
                                std::to_string(count));

    BoundaryEstimate est;
    est.position_px = position;
    est.position_nm = position * profile.pixel_pitch_nm;
    return est;
}

// Signed boundary shift, positive toward the weak fluorophore's side.
// WeakSide::none keeps the raw rightward-positive sign.
inline double boundary_shift_px(double position_px, double true_boundary_px,
                                WeakSide weak = WeakSide::none) {
    const double raw = position_px - true_boundary_px;
    return weak == WeakSide::left ? -raw : raw;
}

inline BoundaryEstimate boundary_from_threshold(const Profile& profile, double threshold,
                                                double true_boundary_px, WeakSide weak,
                                                double central_fraction = 0.8) {
    BoundaryEstimate est = boundary_from_threshold(profile, threshold, central_fraction);
    est.shift_px = boundary_shift_px(est.position_px, true_boundary_px, weak);
    return est;
}

using Mask = Plane<unsigned char>;

// Mask selecting the central `fraction` of both axes (same trim rule as the
// profile crossing search).
inline Mask central_region_mask(std::size_t width, std::size_t height,
                                double fraction = 0.8) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::domain_error("central_region_mask: fraction out of range");
    // Keep round(fraction * n) pixels per axis; integer arithmetic from there
    // on so representation noise in (1 - fraction) cannot shift the trim.
    const auto trim_of = [fraction](std::size_t n) {
        const auto keep = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(n)));
        return (n - std::min(keep, n)) / 2;
    };
    const std::size_t tx = trim_of(width);
    const std::size_t ty = trim_of(height);
    Mask m(width, height, 0);
    for (std::size_t y = ty; y < height - ty; ++y)
        for (std::size_t x = tx; x < width - tx; ++x)
            m(x, y) = 1;
    return m;
}

// Restrict a mask to pixels where the map is defined.
inline Mask masked_defined(const LifetimeMap& map, Mask m) {
    for (std::size_t p = 0; p < m.size(); ++p)
        if (m[p] && std::isnan(map.tau_ns[p]))
            m[p] = 0;
    return m;
}

inline double lifetime_rmse(const LifetimeMap& estimate, const LifetimeMap& truth,
                            const Mask& mask) {
    if (!estimate.tau_ns.same_shape(truth.tau_ns) ||
        estimate.width() != mask.width() || estimate.height() != mask.height())
        throw std::domain_error("lifetime_rmse: shapes do not match");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (!mask[p])
            continue;
        const double d = estimate.tau_ns[p] - truth.tau_ns[p];
        sum += d * d;
        ++count;
    }
    if (count == 0)
        throw std::domain_error("lifetime_rmse: mask selects no pixels");
    return std::sqrt(sum / static_cast<double>(count));
}

} // namespace flim

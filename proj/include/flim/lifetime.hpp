#pragma once

// Per-pixel phase-lifetime extraction from a complex field. Pixels whose
// real component is too small to carry a meaningful phase are marked
// undefined (NaN) instead of producing wild ratios.

#include <cmath>
#include <limits>

#include "flim/field.hpp"
#include "flim/phasor.hpp"
#include "flim/plane.hpp"

namespace flim {

struct LifetimeMap {
    ScalarPlane tau_ns;       // NaN marks undefined pixels
    double pixel_pitch_nm = 0.0;

    std::size_t width() const { return tau_ns.width(); }
    std::size_t height() const { return tau_ns.height(); }
};

// Phase lifetime per pixel. The undefined-pixel floor is relative to the
// largest |re| in the plane, so it adapts to the field's overall scale.
inline LifetimeMap extract_lifetime(const ComplexField& field, double rel_floor = 1e-6) {
    field.check_metadata();
    const double omega = angular_frequency(field.frequency_mhz);
    double ref = 0.0;
    for (std::size_t p = 0; p < field.re.size(); ++p)
        ref = std::max(ref, std::abs(field.re[p]));

    LifetimeMap map;
    map.pixel_pitch_nm = field.pixel_pitch_nm;
    map.tau_ns = ScalarPlane(field.width(), field.height());
    const double floor = rel_floor * ref;
    for (std::size_t p = 0; p < field.re.size(); ++p) {
        map.tau_ns[p] = std::abs(field.re[p]) > floor
                            ? field.im[p] / (omega * field.re[p])
                            : std::numeric_limits<double>::quiet_NaN();
    }
    return map;
}

} // namespace flim

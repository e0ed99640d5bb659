#pragma once

// Human-consumable outputs for lifetime maps: CSV tables, 16-bit PGM
// renderings with a sidecar recording the value range, and line-profile
// CSVs. Numbers are formatted with std::to_chars (locale-independent, '.'
// decimal separator) at 9 significant digits; lines end with LF.
//
// Lifetime maps stored as 1-plane FieldFiles use -1.0 as the undefined-pixel
// sentinel, since the file format forbids NaN and lifetimes are nonnegative.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "flim/deconv.hpp"
#include "flim/field_io.hpp"
#include "flim/lifetime.hpp"
#include "flim/metrics.hpp"

namespace flim {

inline constexpr double lifetime_undefined_sentinel = -1.0;

inline std::string format_number(double v) {
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 9);
    if (ec != std::errc{})
        throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, ptr);
}

// Map <-> 1-plane FieldFile, NaN encoded as the sentinel.
inline ScalarField lifetime_to_scalar_field(const LifetimeMap& map) {
    ScalarField f;
    f.plane = map.tau_ns;
    f.pixel_pitch_nm = map.pixel_pitch_nm;
    f.frequency_mhz = 0.0;
    for (std::size_t p = 0; p < f.plane.size(); ++p)
        if (std::isnan(f.plane[p]))
            f.plane[p] = lifetime_undefined_sentinel;
    return f;
}

inline LifetimeMap lifetime_from_scalar_field(const ScalarField& field) {
    LifetimeMap map;
    map.tau_ns = field.plane;
    map.pixel_pitch_nm = field.pixel_pitch_nm;
    for (std::size_t p = 0; p < map.tau_ns.size(); ++p)
        if (map.tau_ns[p] == lifetime_undefined_sentinel)
            map.tau_ns[p] = std::numeric_limits<double>::quiet_NaN();
    return map;
}

// CSV of the full map, one row per pixel; undefined cells left blank.
inline void write_lifetime_csv(const LifetimeMap& map, const std::filesystem::path& path) {
    std::string out = "x_px,y_px,lifetime_ns\n";
    for (std::size_t y = 0; y < map.height(); ++y) {
        for (std::size_t x = 0; x < map.width(); ++x) {
            out += std::to_string(x);
            out += ',';
            out += std::to_string(y);
            out += ',';
            const double v = map.tau_ns(x, y);
            if (!std::isnan(v))
                out += format_number(v);
            out += '\n';
        }
    }
    atomic_write_file(path, out);
}

// 16-bit binary PGM (big-endian samples per the format), linear map of
// [min, max] over defined pixels to [0, 65535]. Undefined pixels render as
// 0, and a flat map (min == max) renders all zeros. The sidecar
// "<path>.range.txt" records the mapping.
inline void write_lifetime_pgm16(const LifetimeMap& map, const std::filesystem::path& path) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < map.tau_ns.size(); ++p) {
        const double v = map.tau_ns[p];
        if (std::isnan(v))
            continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const bool flat = !(hi > lo); // also covers the all-undefined case

    std::string out = "P5\n" + std::to_string(map.width()) + " " +
                      std::to_string(map.height()) + "\n65535\n";
    for (std::size_t p = 0; p < map.tau_ns.size(); ++p) {
        const double v = map.tau_ns[p];
        std::uint16_t g = 0;
        if (!std::isnan(v) && !flat) {
            const double t = (v - lo) / (hi - lo);
            g = static_cast<std::uint16_t>(std::lround(t * 65535.0));
        }
        out.push_back(static_cast<char>(g >> 8));
        out.push_back(static_cast<char>(g & 0xff));
    }
    atomic_write_file(path, out);

    std::string sidecar;
    if (flat) {
        sidecar = "min_ns=\nmax_ns=\nnote=flat or empty map, all pixels written as 0\n";
    } else {
        sidecar = "min_ns=" + format_number(lo) + "\nmax_ns=" + format_number(hi) +
                  "\nundefined_pixels_written_as=0\n";
    }
    std::filesystem::path sidecar_path = path;
    sidecar_path += ".range.txt";
    atomic_write_file(sidecar_path, sidecar);
}

// Line profile CSV: pixel coordinate (cell centre), physical coordinate,
// lifetime. Undefined samples leave the value blank.
inline void write_profile_csv(const Profile& profile, const std::filesystem::path& path) {
    std::string out = "x_px,x_nm,lifetime_ns\n";
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        const double x = static_cast<double>(i) + 0.5;
        out += format_number(x);
        out += ',';
        out += format_number(x * profile.pixel_pitch_nm);
        out += ',';
        if (!std::isnan(profile.values[i]))
            out += format_number(profile.values[i]);
        out += '\n';
    }
    atomic_write_file(path, out);
}

// Convergence trace CSV, one row per iteration.
inline void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path) {
    std::string out = "iteration,residual_l2,max_rel_change\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_number(trace[i].residual_l2);
        out += ',';
        out += format_number(trace[i].max_rel_change);
        out += '\n';
    }
    atomic_write_file(path, out);
}

} // namespace flim

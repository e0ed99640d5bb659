#pragma once

// FieldFile: the toolkit's binary raster container.
//
//   offset  size  content
//        0     8  magic "FLIMCF1\0"
//        8     4  width, unsigned 32-bit little-endian
//       12     4  height, u32 LE
//       16     4  planes, u32 LE: 1 = scalar, 2 = complex (re plane, im plane)
//       20     4  pixel_pitch_nm, IEEE-754 binary32 LE
//       24     4  frequency_mhz, binary32 LE
//       28     -  payload: planes * height * width binary32 LE values,
//                 plane-sequential, each plane row-major
//
// The payload must contain exactly 4*planes*height*width bytes and no
// NaN/Inf. Parse failures throw ParseError carrying the byte offset of the
// problem. Values are binary32 on disk; reading yields doubles that are
// exactly representable as binary32, so a read-write cycle is bit-identical.
//
// Writes go to a temporary file in the target directory followed by a
// rename, so readers never observe a half-written file.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flim/field.hpp"
#include "flim/plane.hpp"

namespace flim {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::uint64_t offset)
        : std::runtime_error(std::move(message) + " (byte offset " +
                             std::to_string(offset) + ")"),
          byte_offset(offset) {}

    std::uint64_t byte_offset;
};

// A single-plane raster with the same metadata slots as ComplexField.
struct ScalarField {
    ScalarPlane plane;
    double pixel_pitch_nm = 0.0;
    double frequency_mhz = 0.0;
};

using LoadedField = std::variant<ScalarField, ComplexField>;

inline constexpr char field_file_magic[8] = {'F', 'L', 'I', 'M', 'C', 'F', '1', '\0'};
inline constexpr std::size_t field_file_header_size = 28;

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float read_f32le(const unsigned char* p) {
    const std::uint32_t bits = read_u32le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

inline void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void append_f32le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32le(out, bits);
}

} // namespace detail

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string digest_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = hex[digest & 0xf];
        digest >>= 4;
    }
    return s;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad())
        throw std::runtime_error("read failed: " + path.string());
    return bytes;
}

inline std::uint64_t file_digest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return fnv1a64(bytes.data(), bytes.size());
}

// Write bytes to path atomically: temp file in the same directory, fsync-free
// rename over the target.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("rename failed for " + path.string() + ": " + ec.message());
    }
}

inline LoadedField parse_field(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < field_file_header_size) {
        if (bytes.size() < 8 ||
            std::memcmp(bytes.data(), field_file_magic, 8) != 0)
            throw ParseError("bad magic: not a FieldFile", 0);
        throw ParseError("truncated header: expected " +
                             std::to_string(field_file_header_size) + " bytes, got " +
                             std::to_string(bytes.size()),
                         bytes.size());
    }
    if (std::memcmp(bytes.data(), field_file_magic, 8) != 0)
        throw ParseError("bad magic: not a FieldFile", 0);

    const std::uint32_t width = detail::read_u32le(bytes.data() + 8);
    const std::uint32_t height = detail::read_u32le(bytes.data() + 12);
    const std::uint32_t planes = detail::read_u32le(bytes.data() + 16);
    if (width == 0)
        throw ParseError("width must be nonzero", 8);
    if (height == 0)
        throw ParseError("height must be nonzero", 12);
    if (planes != 1 && planes != 2)
        throw ParseError("planes must be 1 or 2, got " + std::to_string(planes), 16);

    const double pitch = detail::read_f32le(bytes.data() + 20);
    const double freq = detail::read_f32le(bytes.data() + 24);

    const std::uint64_t count =
        static_cast<std::uint64_t>(width) * height * planes;
    const std::uint64_t expected = field_file_header_size + 4 * count;
    if (bytes.size() != expected)
        throw ParseError("payload size mismatch: expected " + std::to_string(expected) +
                             " bytes total, got " + std::to_string(bytes.size()),
                         bytes.size() < expected ? bytes.size() : expected);

    std::vector<ScalarPlane> loaded;
    for (std::uint32_t pl = 0; pl < planes; ++pl) {
        ScalarPlane plane(width, height);
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(width) * height; ++i) {
            const std::uint64_t offset =
                field_file_header_size +
                4 * (static_cast<std::uint64_t>(pl) * width * height + i);
            const float v = detail::read_f32le(bytes.data() + offset);
            if (!std::isfinite(v))
                throw ParseError("non-finite payload value", offset);
            plane[i] = static_cast<double>(v);
        }
        loaded.push_back(std::move(plane));
    }

    if (planes == 1) {
        ScalarField f;
        f.plane = std::move(loaded[0]);
        f.pixel_pitch_nm = pitch;
        f.frequency_mhz = freq;
        return f;
    }
    ComplexField f;
    f.re = std::move(loaded[0]);
    f.im = std::move(loaded[1]);
    f.pixel_pitch_nm = pitch;
    f.frequency_mhz = freq;
    return f;
}

inline LoadedField read_field(const std::filesystem::path& path) {
    return parse_field(read_file_bytes(path));
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
    LoadedField f = read_field(path);
    if (auto* c = std::get_if<ComplexField>(&f))
        return std::move(*c);
    throw std::runtime_error("expected a 2-plane complex field: " + path.string());
}

inline ScalarField read_scalar_field(const std::filesystem::path& path) {
    LoadedField f = read_field(path);
    if (auto* s = std::get_if<ScalarField>(&f))
        return std::move(*s);
    throw std::runtime_error("expected a 1-plane scalar field: " + path.string());
}

namespace detail {

inline void append_header(std::string& out, std::uint32_t width, std::uint32_t height,
                          std::uint32_t planes, double pitch, double freq) {
    out.append(field_file_magic, 8);
    append_u32le(out, width);
    append_u32le(out, height);
    append_u32le(out, planes);
    append_f32le(out, static_cast<float>(pitch));
    append_f32le(out, static_cast<float>(freq));
}

inline void append_plane(std::string& out, const ScalarPlane& plane) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
        const auto v = static_cast<float>(plane[i]);
        if (!std::isfinite(v))
            throw std::domain_error("write_field: non-finite value at index " +
                                    std::to_string(i));
        append_f32le(out, v);
    }
}

} // namespace detail

inline std::string serialize_field(const ComplexField& field) {
    field.check_metadata();
    if (!field.re.same_shape(field.im))
        throw std::domain_error("write_field: plane shapes differ");
    std::string out;
    out.reserve(field_file_header_size + 8 * field.size());
    detail::append_header(out, static_cast<std::uint32_t>(field.width()),
                          static_cast<std::uint32_t>(field.height()), 2,
                          field.pixel_pitch_nm, field.frequency_mhz);
    detail::append_plane(out, field.re);
    detail::append_plane(out, field.im);
    return out;
}

inline std::string serialize_field(const ScalarField& field) {
    std::string out;
    out.reserve(field_file_header_size + 4 * field.plane.size());
    detail::append_header(out, static_cast<std::uint32_t>(field.plane.width()),
                          static_cast<std::uint32_t>(field.plane.height()), 1,
                          field.pixel_pitch_nm, field.frequency_mhz);
    detail::append_plane(out, field.plane);
    return out;
}

inline void write_field(const std::filesystem::path& path, const ComplexField& field) {
    atomic_write_file(path, serialize_field(field));
}

inline void write_field(const std::filesystem::path& path, const ScalarField& field) {
    atomic_write_file(path, serialize_field(field));
}

} // namespace flim

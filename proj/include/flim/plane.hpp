#pragma once

// Row-major 2D scalar buffer. Rows are contiguous: index = y * width + x.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flim {

template <typename T = double>
class Plane {
public:
    Plane() = default;

    Plane(std::size_t width, std::size_t height, T fill = T{})
        : width_(width), height_(height), data_(width * height, fill) {
        if (width == 0 || height == 0)
            throw std::invalid_argument("Plane: dimensions must be nonzero");
    }

    Plane(std::size_t width, std::size_t height, std::vector<T> values)
        : width_(width), height_(height), data_(std::move(values)) {
        if (width == 0 || height == 0)
            throw std::invalid_argument("Plane: dimensions must be nonzero");
        if (data_.size() != width * height)
            throw std::invalid_argument("Plane: value count does not match dimensions");
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    const std::vector<T>& values() const { return data_; }

    bool same_shape(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<T> data_;
};

using ScalarPlane = Plane<double>;

} // namespace flim

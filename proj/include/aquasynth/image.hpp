#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aquasynth/errors.hpp"

namespace aquasynth {

/// One value per color channel, in R, G, B order.
using Rgb = std::array<double, 3>;

/// Dense row-major raster with interleaved channels.
template <typename T>
class Image {
public:
    Image() = default;

    Image(std::size_t height, std::size_t width, std::size_t channels, T fill = T{})
        : height_(height), width_(width), channels_(channels),
          data_(height * width * channels, fill) {}

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixels() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t y, std::size_t x, std::size_t c = 0) noexcept {
        return data_[(y * width_ + x) * channels_ + c];
    }
    const T& operator()(std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
        return data_[(y * width_ + x) * channels_ + c];
    }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool same_geometry(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<T> data_;
};

/// H x W x 3 linear or encoded color image.
using ColorImage = Image<double>;
/// H x W single-channel map (depth, field, weight).
using Plane = Image<double>;

inline ColorImage make_color(std::size_t height, std::size_t width, double fill = 0.0) {
    return ColorImage(height, width, 3, fill);
}

inline Plane make_plane(std::size_t height, std::size_t width, double fill = 0.0) {
    return Plane(height, width, 1, fill);
}

inline void require_channels(const Image<double>& img, std::size_t channels, const char* what) {
    if (img.channels() != channels) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(channels) +
                             " channel(s), got " + std::to_string(img.channels()));
    }
}

inline void require_same_geometry(const Image<double>& a, const Image<double>& b, const char* what) {
    if (!a.same_geometry(b)) {
        throw DimensionError(std::string(what) + ": " + std::to_string(a.height()) + "x" +
                             std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                             "x" + std::to_string(b.width()));
    }
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double max_of(std::span<const double> v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

} // namespace aquasynth

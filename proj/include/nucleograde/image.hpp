#pragma once

/// @file image.hpp
/// @brief Row-major 2D grids used as the pipeline currency: RGB input,
///        real-valued grayscale fields and binary masks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"

namespace nucleograde {

template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    /// Replicated-boundary access.
    const T& clamped(int x, int y) const {
        return data_[index(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1))];
    }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool same_shape(const auto& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::size_t checked_size(int width, int height) {
        if (width < 0 || height < 0) {
            throw Error(ErrorCode::InvalidImage, "negative image dimensions");
        }
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Grid<Rgb>;
using GrayImage = Grid<double>;
/// 0 = background, 1 = foreground.
using BinaryMask = Grid<std::uint8_t>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned inclusive pixel box.
struct Box {
    int x0 = 0;
    int y0 = 0;
    int x1 = -1;
    int y1 = -1;

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    bool contains(double x, double y) const noexcept {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
};

template <typename T>
void require_same_shape(const Grid<T>& a, const auto& b, const char* what) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::DimensionMismatch, what);
    }
}

inline std::size_t count_true(const BinaryMask& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.values().begin(), mask.values().end(), [](auto v) { return v != 0; }));
}

inline BinaryMask complement(const BinaryMask& mask) {
    BinaryMask out(mask.width(), mask.height());
    std::ranges::transform(mask.values(), out.values().begin(),
                           [](std::uint8_t v) -> std::uint8_t { return v ? 0 : 1; });
    return out;
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "mask_and: shapes differ");
    BinaryMask out(a.width(), a.height());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = (av[i] && bv[i]) ? 1 : 0;
    return out;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "mask_or: shapes differ");
    BinaryMask out(a.width(), a.height());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = (av[i] || bv[i]) ? 1 : 0;
    return out;
}

/// True iff every foreground pixel of `inner` is foreground in `outer`.
inline bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
    require_same_shape(inner, outer, "is_subset: shapes differ");
    auto iv = inner.values();
    auto ov = outer.values();
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (iv[i] && !ov[i]) return false;
    }
    return true;
}

/// false -> 0, true -> 255.
inline GrayImage mask_to_gray(const BinaryMask& mask, double on = 255.0) {
    GrayImage out(mask.width(), mask.height());
    std::ranges::transform(mask.values(), out.values().begin(),
                           [on](std::uint8_t v) { return v ? on : 0.0; });
    return out;
}

/// A nucleus mask stored as a crop with its offset in the full image.
struct Region {
    int x0 = 0;
    int y0 = 0;
    BinaryMask mask;

    std::size_t area() const { return count_true(mask); }

    BinaryMask to_full(int width, int height) const {
        BinaryMask out(width, height);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask(x, y) && out.contains(x0 + x, y0 + y)) out(x0 + x, y0 + y) = 1;
        return out;
    }

    bool at(int gx, int gy) const {
        const int x = gx - x0;
        const int y = gy - y0;
        return mask.contains(x, y) && mask(x, y);
    }
};

template <typename T>
Grid<T> crop(const Grid<T>& src, const Box& box) {
    Grid<T> out(box.width(), box.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out(x, y) = src(box.x0 + x, box.y0 + y);
    return out;
}

inline bool all_finite(const GrayImage& img) {
    return std::ranges::all_of(img.values(), [](double v) { return std::isfinite(v); });
}

/// Linear min-max rescale to [lo, hi]; a flat image maps to lo.
inline GrayImage rescale(const GrayImage& img, double lo = 0.0, double hi = 255.0) {
    GrayImage out(img.width(), img.height(), lo);
    if (img.empty()) return out;
    const auto [mn, mx] = std::ranges::minmax(img.values());
    const double span = mx - mn;
    if (span <= 0.0) return out;
    std::ranges::transform(img.values(), out.values().begin(),
                           [&](double v) { return lo + (v - mn) / span * (hi - lo); });
    return out;
}

}  // namespace nucleograde

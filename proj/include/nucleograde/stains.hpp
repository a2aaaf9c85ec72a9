#pragma once

/// @file stains.hpp
/// @brief Beer-Lambert optical density and H&E color deconvolution.

#include <array>
#include <cmath>
#include <optional>

#include "error.hpp"
#include "image.hpp"

namespace nucleograde::stains {

using Vec3 = std::array<double, 3>;

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n <= 0.0) throw Error(ErrorCode::InvalidArgument, "zero-length stain vector");
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Three unit stain vectors in optical-density space. OD = M * c where the
/// columns of M are (hematoxylin, eosin, residual).
class StainMatrix {
public:
    static constexpr double kUnitTolerance = 1e-6;
    static constexpr double kSingularTolerance = 1e-9;

    /// Normalizes h and e and completes the basis with their normalized cross product.
    static StainMatrix from_he(const Vec3& h, const Vec3& e) {
        const Vec3 hn = normalized(h);
        const Vec3 en = normalized(e);
        return StainMatrix(hn, en, normalized(cross(hn, en)));
    }

    /// Vectors must already be unit length.
    static StainMatrix from_vectors(const Vec3& h, const Vec3& e, const Vec3& residual) {
        for (const Vec3* v : {&h, &e, &residual}) {
            if (std::abs(norm(*v) - 1.0) > kUnitTolerance) {
                throw Error(ErrorCode::InvalidArgument, "stain vectors must have unit norm");
            }
        }
        return StainMatrix(h, e, residual);
    }

    /// Commonly used H&E reference vectors.
    static StainMatrix default_he() { return from_he({0.650, 0.704, 0.286}, {0.072, 0.990, 0.105}); }

    const Vec3& hematoxylin() const noexcept { return columns_[0]; }
    const Vec3& eosin() const noexcept { return columns_[1]; }
    const Vec3& residual() const noexcept { return columns_[2]; }

    double determinant() const noexcept {
        const Vec3 c = cross(columns_[1], columns_[2]);
        return columns_[0][0] * c[0] + columns_[0][1] * c[1] + columns_[0][2] * c[2];
    }

    /// Concentrations c with M * c = od. Throws SingularStainMatrix.
    Vec3 unmix(const Vec3& od) const {
        const auto& inv = inverse();
        Vec3 c{};
        for (int i = 0; i < 3; ++i) c[i] = inv[i][0] * od[0] + inv[i][1] * od[1] + inv[i][2] * od[2];
        return c;
    }

    /// M * c.
    Vec3 mix(const Vec3& c) const noexcept {
        Vec3 od{};
        for (int row = 0; row < 3; ++row)
            for (int col = 0; col < 3; ++col) od[row] += columns_[col][row] * c[col];
        return od;
    }

private:
    using Mat3 = std::array<Vec3, 3>;

    StainMatrix(const Vec3& h, const Vec3& e, const Vec3& r) : columns_{h, e, r} {
        const double det = determinant();
        if (std::abs(det) < kSingularTolerance) return;
        // Rows of the inverse are the reciprocal basis: inv_i . col_j = delta_ij.
        const Vec3 r0 = cross(columns_[1], columns_[2]);
        const Vec3 r1 = cross(columns_[2], columns_[0]);
        const Vec3 r2 = cross(columns_[0], columns_[1]);
        Mat3 inv{};
        for (int k = 0; k < 3; ++k) {
            inv[0][k] = r0[k] / det;
            inv[1][k] = r1[k] / det;
            inv[2][k] = r2[k] / det;
        }
        inverse_ = inv;
    }

    const Mat3& inverse() const {
        if (!inverse_) throw Error(ErrorCode::SingularStainMatrix, "stain matrix is not invertible");
        return *inverse_;
    }

    Mat3 columns_;
    std::optional<Mat3> inverse_;
};

/// OD_c = -log10((channel + 1) / (background + 1)).
inline Vec3 optical_density(const Rgb& px, double background = 255.0) {
    const double denom = background + 1.0;
    return {-std::log10((px.r + 1.0) / denom), -std::log10((px.g + 1.0) / denom),
            -std::log10((px.b + 1.0) / denom)};
}

inline Grid<Vec3> rgb_to_optical_density(const RgbImage& img, double background = 255.0) {
    if (!(background > 0.0)) throw Error(ErrorCode::InvalidArgument, "background must be positive");
    Grid<Vec3> out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(),
                           [background](const Rgb& px) { return optical_density(px, background); });
    return out;
}

/// Inverse of optical_density for one channel, rounded and clamped to 8 bits.
inline std::uint8_t channel_from_density(double od, double background = 255.0) {
    const double v = (background + 1.0) * std::pow(10.0, -od) - 1.0;
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct SeparationOptions {
    double background = 255.0;
    /// Concentration mapped to the far end of the gray scale.
    double max_concentration = 1.5;
    /// true: concentration 0 -> 255, max -> 0 (nuclei dark).
    bool dark_nuclei = true;
};

/// Per-pixel hematoxylin concentration, clamped below at 0.
inline GrayImage hematoxylin_concentration(const RgbImage& img, const StainMatrix& stains,
                                           double background = 255.0) {
    GrayImage out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(), [&](const Rgb& px) {
        return std::max(0.0, stains.unmix(optical_density(px, background))[0]);
    });
    return out;
}

inline GrayImage separate_hematoxylin(const RgbImage& img, const StainMatrix& stains,
                                      const SeparationOptions& opt = {}) {
    if (!(opt.max_concentration > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "max_concentration must be positive");
    }
    GrayImage conc = hematoxylin_concentration(img, stains, opt.background);
    for (double& v : conc.values()) {
        const double t = std::min(v, opt.max_concentration) / opt.max_concentration;
        v = opt.dark_nuclei ? 255.0 * (1.0 - t) : 255.0 * t;
    }
    return conc;
}

}  // namespace nucleograde::stains

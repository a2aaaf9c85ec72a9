#pragma once

/// @file synthetic.hpp
/// @brief Synthetic H&E-like fixtures with known nucleus geometry.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "features.hpp"
#include "image.hpp"
#include "scoring.hpp"
#include "stains.hpp"

namespace nucleograde::synthetic {

struct Ellipse {
    Point center;
    double semi_major = 1.0;
    double semi_minor = 1.0;
    /// Radians, counter-clockwise from the x axis.
    double angle = 0.0;

    double area() const { return std::numbers::pi * semi_major * semi_minor; }

    bool contains(double x, double y) const {
        const double dx = x - center.x;
        const double dy = y - center.y;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double u = (dx * c + dy * s) / semi_major;
        const double v = (-dx * s + dy * c) / semi_minor;
        return u * u + v * v <= 1.0;
    }
};

struct StainLook {
    stains::StainMatrix stains = stains::StainMatrix::default_he();
    /// Hematoxylin concentration inside nuclei.
    double nucleus_h = 0.9;
    /// Background (eosin-stained tissue) concentrations.
    double background_h = 0.0;
    double background_e = 0.25;
    /// Standard deviation of additive 8-bit noise per channel.
    double noise_sigma = 0.0;
    std::uint32_t noise_seed = 1;
};

/// Fraction of a pixel covered by any ellipse, by 4x4 supersampling.
inline double coverage(const std::vector<Ellipse>& shapes, int x, int y) {
    int hits = 0;
    for (int sy = 0; sy < 4; ++sy) {
        for (int sx = 0; sx < 4; ++sx) {
            const double px = x - 0.375 + 0.25 * sx;
            const double py = y - 0.375 + 0.25 * sy;
            for (const auto& e : shapes) {
                if (e.contains(px, py)) {
                    ++hits;
                    break;
                }
            }
        }
    }
    return hits / 16.0;
}

/// Beer-Lambert rendering of hematoxylin ellipses over eosin background.
inline RgbImage render(int width, int height, const std::vector<Ellipse>& shapes, const StainLook& look) {
    RgbImage img(width, height);
    std::mt19937 rng(look.noise_seed);
    std::normal_distribution<double> noise(0.0, look.noise_sigma > 0.0 ? look.noise_sigma : 1.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double cov = shapes.empty() ? 0.0 : coverage(shapes, x, y);
            const double h = look.background_h + cov * (look.nucleus_h - look.background_h);
            const auto od = look.stains.mix({h, look.background_e, 0.0});
            std::array<std::uint8_t, 3> ch{};
            for (int c = 0; c < 3; ++c) {
                double v = 256.0 * std::pow(10.0, -od[static_cast<std::size_t>(c)]) - 1.0;
                if (look.noise_sigma > 0.0) v += noise(rng);
                ch[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
            img(x, y) = {ch[0], ch[1], ch[2]};
        }
    }
    return img;
}

/// Grayscale disk: `inside` for dx^2 + dy^2 <= r^2, `outside` elsewhere.
inline GrayImage disk_image(int width, int height, double cx, double cy, double r, double inside, double outside) {
    GrayImage img(width, height, outside);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img(x, y) = inside;
    return img;
}

inline BinaryMask disk_mask(int width, int height, double cx, double cy, double r) {
    BinaryMask m(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(x, y) = 1;
    return m;
}

struct SlideSpec {
    int width = 512;
    int height = 512;
    int count = 30;
    /// Area of a planted healthy nucleus.
    double baseline_area = 60.0;
    double min_area = 380.0;
    double max_area = 760.0;
    double max_aspect = 1.3;
    /// Minimum background gap between ellipse bounding circles.
    double min_gap = 10.0;
    /// Keeps nuclei away from the image border and the quartering lines.
    double margin = 6.0;
    StainLook look{};
    std::uint32_t seed = 2024;
};

struct Slide {
    RgbImage image;
    std::vector<Ellipse> nuclei;
};

/// Rejection-sampled non-overlapping ellipses with log-uniform areas.
inline Slide generate_slide(const SlideSpec& spec) {
    std::mt19937 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Slide slide;
    const double half_w = spec.width / 2.0;
    const double half_h = spec.height / 2.0;
    int attempts = 0;
    while (static_cast<int>(slide.nuclei.size()) < spec.count && attempts < 200000) {
        ++attempts;
        const double area = spec.min_area * std::pow(spec.max_area / spec.min_area, unit(rng));
        const double aspect = 1.0 + (spec.max_aspect - 1.0) * unit(rng);
        const double b = std::sqrt(area / (std::numbers::pi * aspect));
        const double a = aspect * b;
        const double angle = std::numbers::pi * unit(rng);
        const double reach = a + spec.margin;
        const double cx = reach + (spec.width - 2.0 * reach) * unit(rng);
        const double cy = reach + (spec.height - 2.0 * reach) * unit(rng);
        if (std::abs(cx - half_w) < reach || std::abs(cy - half_h) < reach) continue;
        bool clear = true;
        for (const auto& e : slide.nuclei) {
            if (std::hypot(e.center.x - cx, e.center.y - cy) < e.semi_major + a + spec.min_gap) {
                clear = false;
                break;
            }
        }
        if (clear) slide.nuclei.push_back({{cx, cy}, a, b, angle});
    }
    slide.image = render(spec.width, spec.height, slide.nuclei, spec.look);
    return slide;
}

/// Baseline of the planted healthy nucleus: a disk of `baseline_area`
/// rendered with the slide's stain look and seen through `sep`.
inline scoring::NormalBaseline planted_baseline(const SlideSpec& spec, const stains::SeparationOptions& sep = {}) {
    const double r = std::sqrt(spec.baseline_area / std::numbers::pi);
    const int size = 2 * static_cast<int>(std::ceil(r)) + 5;
    const double c = (size - 1) / 2.0;
    const BinaryMask mask = disk_mask(size, size, c, c, r);
    StainLook clean = spec.look;
    clean.noise_sigma = 0.0;
    const RgbImage inside = render(1, 1, {Ellipse{{0.0, 0.0}, 5.0, 5.0, 0.0}}, clean);
    const double h = stains::separate_hematoxylin(inside, spec.look.stains, sep)(0, 0);
    return {static_cast<double>(count_true(mask)), h, features::region_circularity(mask), 0.0};
}

}  // namespace nucleograde::synthetic

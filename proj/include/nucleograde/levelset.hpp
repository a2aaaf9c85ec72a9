#pragma once

/// @file levelset.hpp
/// @brief Distance-regularized level-set evolution (double-well potential)
///        and per-nucleus boundary segmentation.
///
/// Region convention: phi < 0 is inside.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "filters.hpp"
#include "image.hpp"
#include "morphology.hpp"

namespace nucleograde::levelset {

/// Signed field whose zero level set is the contour.
class LevelSetField {
public:
    LevelSetField() = default;
    LevelSetField(int width, int height, double fill = 0.0) : phi_(width, height, fill) {}
    explicit LevelSetField(GrayImage phi) : phi_(std::move(phi)) {}

    int width() const noexcept { return phi_.width(); }
    int height() const noexcept { return phi_.height(); }
    double& operator()(int x, int y) { return phi_(x, y); }
    double operator()(int x, int y) const { return phi_(x, y); }
    const GrayImage& field() const noexcept { return phi_; }
    GrayImage& field() noexcept { return phi_; }

    bool has_zero_crossing() const {
        bool neg = false;
        bool pos = false;
        for (double v : phi_.values()) {
            neg |= v < 0.0;
            pos |= v >= 0.0;
        }
        return neg && pos;
    }

    friend bool operator==(const LevelSetField&, const LevelSetField&) = default;

private:
    GrayImage phi_;
};

struct DrlseParams {
    double mu = 0.2;
    double lambda = 5.0;
    /// Negative expands the region, positive shrinks it.
    double alpha = -1.5;
    double epsilon = 1.5;
    double dt = 1.0;
    int iterations = 120;

    void validate() const {
        if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be > 0");
        if (!(mu * dt < 0.25)) throw Error(ErrorCode::InvalidArgument, "mu * dt must be < 0.25");
        if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
        if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 0");
    }
};

namespace detail {

struct Gradient {
    GrayImage dx;
    GrayImage dy;
};

/// Central differences with replicated borders (zero normal derivative).
inline Gradient central_gradient(const GrayImage& f) {
    Gradient g{GrayImage(f.width(), f.height()), GrayImage(f.width(), f.height())};
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            g.dx(x, y) = 0.5 * (f.clamped(x + 1, y) - f.clamped(x - 1, y));
            g.dy(x, y) = 0.5 * (f.clamped(x, y + 1) - f.clamped(x, y - 1));
        }
    }
    return g;
}

inline GrayImage divergence(const GrayImage& fx, const GrayImage& fy) {
    GrayImage out(fx.width(), fx.height());
    for (int y = 0; y < fx.height(); ++y)
        for (int x = 0; x < fx.width(); ++x)
            out(x, y) = 0.5 * (fx.clamped(x + 1, y) - fx.clamped(x - 1, y)) +
                        0.5 * (fy.clamped(x, y + 1) - fy.clamped(x, y - 1));
    return out;
}

/// p'(s)/s for the double-well potential p(s) = (1 - cos 2 pi s) / (2 pi)^2
/// on [0, 1] and (s - 1)^2 / 2 beyond.
inline double double_well_ratio(double s) {
    double ps = 0.0;
    if (s <= 1.0) {
        ps = std::sin(2.0 * std::numbers::pi * s) / (2.0 * std::numbers::pi);
    } else {
        ps = s - 1.0;
    }
    const double num = ps != 0.0 ? ps : 1.0;
    const double den = s != 0.0 ? s : 1.0;
    return num / den;
}

}  // namespace detail

/// Smoothed Dirac delta of width epsilon.
inline double dirac(double x, double epsilon) {
    if (x > epsilon || x < -epsilon) return 0.0;
    return (1.0 / (2.0 * epsilon)) * (1.0 + std::cos(std::numbers::pi * x / epsilon));
}

/// g = 1 / (1 + |grad(G_sigma * I)|^2).
inline GrayImage edge_indicator(const GrayImage& img, double sigma) {
    const auto grad = detail::central_gradient(filters::gaussian_blur(img, sigma));
    GrayImage g(img.width(), img.height());
    auto gx = grad.dx.values();
    auto gy = grad.dy.values();
    auto gv = g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = 1.0 / (1.0 + gx[i] * gx[i] + gy[i] * gy[i]);
    return g;
}

/// -c0 inside the region, +c0 outside.
inline LevelSetField init_phi(const BinaryMask& region, double c0 = 2.0) {
    if (!(c0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "c0 must be > 0");
    LevelSetField phi(region.width(), region.height());
    auto rv = region.values();
    auto pv = phi.field().values();
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = rv[i] ? -c0 : c0;
    return phi;
}

inline BinaryMask extract_region(const LevelSetField& phi) {
    return filters::threshold_below(phi.field(), 0.0);
}

/// One explicit DRLSE step:
/// phi += dt * (mu * div(d_p(|grad phi|) grad phi)
///              + lambda * delta(phi) * div(g grad phi / |grad phi|)
///              + alpha * g * delta(phi)).
inline void drlse_step(GrayImage& phi, const GrayImage& g, const detail::Gradient& grad_g,
                       const DrlseParams& p) {
    constexpr double kSmall = 1e-10;
    const auto grad = detail::central_gradient(phi);
    const int w = phi.width();
    const int h = phi.height();
    GrayImage nx(w, h), ny(w, h), rx(w, h), ry(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = grad.dx(x, y);
            const double py = grad.dy(x, y);
            const double s = std::sqrt(px * px + py * py);
            nx(x, y) = px / (s + kSmall);
            ny(x, y) = py / (s + kSmall);
            // (d_p - 1) grad phi; the missing Laplacian is added with a compact
            // stencil below so odd and even pixels stay coupled.
            const double dps = detail::double_well_ratio(s) - 1.0;
            rx(x, y) = dps * px;
            ry(x, y) = dps * py;
        }
    }
    const GrayImage curvature = detail::divergence(nx, ny);
    const GrayImage reg = detail::divergence(rx, ry);
    const GrayImage lap = filters::laplacian(phi);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = dirac(phi(x, y), p.epsilon);
            const double edge =
                d * (grad_g.dx(x, y) * nx(x, y) + grad_g.dy(x, y) * ny(x, y)) + d * g(x, y) * curvature(x, y);
            const double area = d * g(x, y);
            phi(x, y) += p.dt * (p.mu * (reg(x, y) + lap(x, y)) + p.lambda * edge + p.alpha * area);
        }
    }
}

inline LevelSetField drlse_evolve(const LevelSetField& phi0, const GrayImage& g, const DrlseParams& p) {
    p.validate();
    require_same_shape(g, phi0.field(), "drlse_evolve: phi and g differ in shape");
    LevelSetField phi = phi0;
    if (p.iterations == 0) return phi;
    const auto grad_g = detail::central_gradient(g);
    for (int it = 0; it < p.iterations; ++it) {
        drlse_step(phi.field(), g, grad_g, p);
        if (!all_finite(phi.field())) {
            throw Error(ErrorCode::NonFiniteField, "level set diverged; reduce dt");
        }
    }
    return phi;
}

/// mean(| |grad phi| - 1 |) over the band |phi| < band. Zero when the band is empty.
inline double regularity_residual(const LevelSetField& phi, double band = 3.0) {
    const auto grad = detail::central_gradient(phi.field());
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < phi.height(); ++y) {
        for (int x = 0; x < phi.width(); ++x) {
            if (std::abs(phi(x, y)) >= band) continue;
            const double s = std::hypot(grad.dx(x, y), grad.dy(x, y));
            sum += std::abs(s - 1.0);
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

inline std::size_t overlap(const Region& a, const Region& b) {
    std::size_t n = 0;
    for (int y = 0; y < a.mask.height(); ++y)
        for (int x = 0; x < a.mask.width(); ++x)
            if (a.mask(x, y) && b.at(a.x0 + x, a.y0 + y)) ++n;
    return n;
}

/// Keeps the largest 8-connected component (first in raster order on ties).
inline BinaryMask largest_component(const BinaryMask& mask) {
    const auto lab = morphology::label_components(mask, morphology::Connectivity::Eight);
    if (lab.components.size() <= 1) return mask;
    const auto best = std::ranges::max_element(lab.components, [](const auto& a, const auto& b) {
        return a.pixel_count < b.pixel_count || (a.pixel_count == b.pixel_count && a.label > b.label);
    });
    return morphology::component_mask(lab, best->label);
}

struct SegmentParams {
    DrlseParams drlse;
    double edge_sigma = 0.8;
    int padding = 15;
    double c0 = 2.0;
    /// Two evolved regions collide when their overlap exceeds this fraction of
    /// the smaller one; only the region with the stronger boundary survives.
    double collision_overlap = 0.2;
};

struct ComponentFailure {
    int component_label = 0;
    std::string message;
};

struct SegmentResult {
    std::vector<Region> nuclei;
    /// Mean gradient magnitude along each kept region's boundary.
    std::vector<double> boundary_strength;
    std::vector<ComponentFailure> failures;
};

namespace detail {

inline double boundary_strength(const Region& r, const GrayImage& grad_mag) {
    double sum = 0.0;
    std::size_t n = 0;
    const auto& m = r.mask;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            const bool edge = !m.contains(x - 1, y) || !m(x - 1, y) || !m.contains(x + 1, y) ||
                              !m(x + 1, y) || !m.contains(x, y - 1) || !m(x, y - 1) ||
                              !m.contains(x, y + 1) || !m(x, y + 1);
            if (!edge) continue;
            sum += grad_mag(r.x0 + x, r.y0 + y);
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace detail

/// Evolves each connected component of `initial` independently on a padded
/// crop of `diffused`, then resolves collisions in favour of the region with
/// the higher boundary gradient.
inline SegmentResult segment_nuclei(const BinaryMask& initial, const GrayImage& diffused,
                                    const SegmentParams& p) {
    require_same_shape(initial, diffused, "segment_nuclei: mask and image differ in shape");
    p.drlse.validate();
    const auto lab = morphology::label_components(initial, morphology::Connectivity::Eight);

    const auto smooth_grad = detail::central_gradient(filters::gaussian_blur(diffused, p.edge_sigma));
    GrayImage grad_mag(diffused.width(), diffused.height());
    for (int y = 0; y < diffused.height(); ++y)
        for (int x = 0; x < diffused.width(); ++x)
            grad_mag(x, y) = std::hypot(smooth_grad.dx(x, y), smooth_grad.dy(x, y));

    struct Candidate {
        Region region;
        double strength = 0.0;
        std::size_t area = 0;
    };
    std::vector<Candidate> candidates;
    SegmentResult result;

    for (const auto& comp : lab.components) {
        const Box box{std::max(0, comp.bounding_box.x0 - p.padding),
                      std::max(0, comp.bounding_box.y0 - p.padding),
                      std::min(initial.width() - 1, comp.bounding_box.x1 + p.padding),
                      std::min(initial.height() - 1, comp.bounding_box.y1 + p.padding)};
        BinaryMask local(box.width(), box.height());
        for (int y = 0; y < local.height(); ++y)
            for (int x = 0; x < local.width(); ++x)
                local(x, y) = lab.labels(box.x0 + x, box.y0 + y) == comp.label ? 1 : 0;
        try {
            const GrayImage g = edge_indicator(crop(diffused, box), p.edge_sigma);
            const auto phi = drlse_evolve(init_phi(local, p.c0), g, p.drlse);
            Region region{box.x0, box.y0, largest_component(extract_region(phi))};
            const std::size_t area = region.area();
            if (area == 0) continue;
            const double strength = detail::boundary_strength(region, grad_mag);
            candidates.push_back({std::move(region), strength, area});
        } catch (const Error& e) {
            result.failures.push_back({comp.label, e.what()});
        }
    }

    // Order is independent of component processing order.
    std::ranges::sort(candidates, [](const Candidate& a, const Candidate& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        if (a.area != b.area) return a.area > b.area;
        if (a.region.y0 != b.region.y0) return a.region.y0 < b.region.y0;
        return a.region.x0 < b.region.x0;
    });
    std::vector<Candidate> kept;
    for (auto& c : candidates) {
        bool collides = false;
        for (const auto& k : kept) {
            const double shared = static_cast<double>(overlap(c.region, k.region));
            const double smaller = static_cast<double>(std::min(c.area, k.area));
            if (shared > p.collision_overlap * smaller) {
                collides = true;
                break;
            }
        }
        if (!collides) kept.push_back(std::move(c));
    }
    // Report in raster order of region origin for stable output.
    std::ranges::sort(kept, [](const Candidate& a, const Candidate& b) {
        if (a.region.y0 != b.region.y0) return a.region.y0 < b.region.y0;
        if (a.region.x0 != b.region.x0) return a.region.x0 < b.region.x0;
        return a.area > b.area;
    });
    for (auto& k : kept) {
        result.boundary_strength.push_back(k.strength);
        result.nuclei.push_back(std::move(k.region));
    }
    return result;
}

}  // namespace nucleograde::levelset

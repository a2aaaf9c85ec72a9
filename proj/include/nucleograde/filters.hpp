#pragma once

/// @file filters.hpp
/// @brief Scalar-field filters. Every filter uses replicated boundaries.

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace nucleograde::filters {

enum class Conductance {
    /// c = exp(-(|d| / K)^2), Perona-Malik.
    Exponential,
    /// c = 1, linear heat equation.
    Unit,
};

struct DiffusionParams {
    int iterations = 10;
    double kappa = 15.0;
    double rate = 0.2;
    Conductance conductance = Conductance::Exponential;

    void validate() const {
        if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "diffusion iterations < 0");
        if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion kappa must be > 0");
        if (!(rate > 0.0 && rate <= 0.25)) {
            throw Error(ErrorCode::InvalidArgument, "diffusion rate must lie in (0, 0.25]");
        }
    }
};

struct DoGParams {
    double sigma1 = 4.0;
    double sigma2 = 10.0;

    void validate() const {
        if (!(sigma1 > 0.0 && sigma1 < sigma2)) {
            throw Error(ErrorCode::InvalidArgument, "DoG requires 0 < sigma1 < sigma2");
        }
    }
};

/// Explicit 4-neighbour scheme in flux form: the flux across each pixel edge is
/// shared by both pixels, so the image sum is conserved.
inline GrayImage anisotropic_diffusion(const GrayImage& img, const DiffusionParams& p) {
    p.validate();
    GrayImage cur = img;
    GrayImage next = img;
    const int w = img.width();
    const int h = img.height();
    const double inv_k2 = 1.0 / (p.kappa * p.kappa);
    auto conduct = [&](double d) {
        return p.conductance == Conductance::Unit ? 1.0 : std::exp(-(d * d) * inv_k2);
    };
    for (int it = 0; it < p.iterations; ++it) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double c = cur(x, y);
                const double dn = cur.clamped(x, y - 1) - c;
                const double ds = cur.clamped(x, y + 1) - c;
                const double de = cur.clamped(x + 1, y) - c;
                const double dw = cur.clamped(x - 1, y) - c;
                next(x, y) = c + p.rate * (conduct(dn) * dn + conduct(ds) * ds +
                                           conduct(de) * de + conduct(dw) * dw);
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

/// Normalized 1D Gaussian with radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable convolution of rows then columns.
inline GrayImage convolve_separable(const GrayImage& img, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    GrayImage tmp(img.width(), img.height());
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] * img.clamped(x + i, y);
            tmp(x, y) = acc;
        }
    }
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
            out(x, y) = acc;
        }
    }
    return out;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    return convolve_separable(img, gaussian_kernel(sigma));
}

/// 4-neighbour Laplacian stencil.
inline GrayImage laplacian(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out(x, y) = img.clamped(x + 1, y) + img.clamped(x - 1, y) + img.clamped(x, y + 1) +
                        img.clamped(x, y - 1) - 4.0 * img(x, y);
    return out;
}

/// Laplacian of the Gaussian-blurred image. Dark-on-bright edges give a
/// positive response on the dark side.
inline GrayImage log_filter(const GrayImage& img, double sigma) {
    return laplacian(gaussian_blur(img, sigma));
}

/// blur(sigma1) - blur(sigma2). Only requires positive sigmas so the
/// degenerate sigma1 == sigma2 case stays usable.
inline GrayImage dog_filter(const GrayImage& img, const DoGParams& p) {
    GrayImage a = gaussian_blur(img, p.sigma1);
    const GrayImage b = gaussian_blur(img, p.sigma2);
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] -= bv[i];
    return a;
}

inline GrayImage bilateral_filter(const GrayImage& img, double sigma_space, double sigma_range) {
    if (!(sigma_space > 0.0) || !(sigma_range > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "bilateral sigmas must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_space));
    const double ks = 1.0 / (2.0 * sigma_space * sigma_space);
    const double kr = 1.0 / (2.0 * sigma_range * sigma_range);
    std::vector<double> spatial;
    spatial.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) spatial.push_back(std::exp(-(dx * dx + dy * dy) * ks));

    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double c = img(x, y);
            double acc = 0.0;
            double wsum = 0.0;
            std::size_t k = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx, ++k) {
                    const double v = img.clamped(x + dx, y + dy);
                    const double wgt = spatial[k] * std::exp(-(v - c) * (v - c) * kr);
                    acc += wgt * v;
                    wsum += wgt;
                }
            }
            out(x, y) = acc / wsum;
        }
    }
    return out;
}

/// 255 * (in / 255)^gamma.
inline GrayImage gamma_correct(const GrayImage& img, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    GrayImage out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(), [gamma](double v) {
        return 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, gamma);
    });
    return out;
}

/// Strict: true iff value > t.
inline BinaryMask threshold(const GrayImage& img, double t) {
    BinaryMask out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(),
                           [t](double v) -> std::uint8_t { return v > t ? 1 : 0; });
    return out;
}

/// Strict: true iff value < t.
inline BinaryMask threshold_below(const GrayImage& img, double t) {
    BinaryMask out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(),
                           [t](double v) -> std::uint8_t { return v < t ? 1 : 0; });
    return out;
}

}  // namespace nucleograde::filters

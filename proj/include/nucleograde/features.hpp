#pragma once

/// @file features.hpp
/// @brief Per-nucleus measurements: area, mean intensity, circularity (P^2/A)
///        and completed local binary pattern texture histograms.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "morphology.hpp"

namespace nucleograde::features {

struct NucleusFeatures {
    double area = 0.0;
    double mean_intensity = 0.0;
    double circularity = 0.0;
    int nucleoli_count = 0;
};

inline void require_nonempty(const BinaryMask& mask) {
    if (count_true(mask) == 0) throw Error(ErrorCode::EmptyRegion, "region has no pixels");
}

inline double region_area(const BinaryMask& mask) {
    require_nonempty(mask);
    return static_cast<double>(count_true(mask));
}

inline double region_mean_intensity(const GrayImage& img, const BinaryMask& mask) {
    require_same_shape(img, mask, "region_mean_intensity: shapes differ");
    require_nonempty(mask);
    double sum = 0.0;
    std::size_t n = 0;
    auto iv = img.values();
    auto mv = mask.values();
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (!mv[i]) continue;
        sum += iv[i];
        ++n;
    }
    return sum / static_cast<double>(n);
}

namespace detail {

// Clockwise with y pointing down, starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline int direction_of(int dx, int dy) {
    for (int d = 0; d < 8; ++d)
        if (kDx[d] == dx && kDy[d] == dy) return d;
    return -1;
}

}  // namespace detail

/// Moore-neighbour trace of the outer boundary through pixel centres, as a
/// sequence of direction indices (even = axis step, odd = diagonal step).
/// Stops when the first move out of the start pixel repeats.
inline std::vector<int> trace_boundary(const BinaryMask& mask) {
    using namespace detail;
    auto fg = [&](int x, int y) { return mask.contains(x, y) && mask(x, y) != 0; };
    int sx = -1;
    int sy = -1;
    for (int y = 0; y < mask.height() && sx < 0; ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (fg(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    std::vector<int> chain;
    if (sx < 0) return chain;

    // The raster-first pixel always has background to its west.
    int cx = sx;
    int cy = sy;
    int back = 4;
    int first_move = -1;
    const std::size_t limit = 4 * mask.size() + 8;
    while (chain.size() <= limit) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (fg(cx + kDx[d], cy + kDy[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) return chain;  // isolated pixel
        if (cx == sx && cy == sy) {
            if (first_move < 0) {
                first_move = found;
            } else if (found == first_move) {
                return chain;
            }
        }
        // New backtrack: the last background neighbour examined, seen from the new pixel.
        const int prev = (found + 7) % 8;
        const int bx = cx + kDx[prev];
        const int by = cy + kDy[prev];
        cx += kDx[found];
        cy += kDy[found];
        back = direction_of(bx - cx, by - cy);
        chain.push_back(found);
    }
    return chain;
}

/// Polygonal length of the traced outer boundary: axis steps 1, diagonal sqrt 2.
inline double boundary_perimeter(const BinaryMask& mask) {
    double p = 0.0;
    for (int d : trace_boundary(mask)) p += (d % 2 == 0) ? 1.0 : std::numbers::sqrt2;
    return p;
}

/// P^2 / A for a single 8-connected region.
inline double region_circularity(const BinaryMask& mask) {
    require_nonempty(mask);
    if (morphology::connected_components(mask, morphology::Connectivity::Eight).size() != 1) {
        throw Error(ErrorCode::MultipleComponents, "circularity needs exactly one component");
    }
    const double p = boundary_perimeter(mask);
    return p * p / static_cast<double>(count_true(mask));
}

// ---------------------------------------------------------------------------
// Local binary patterns
// ---------------------------------------------------------------------------

struct LbpNeighbourhood {
    int points = 8;
    double radius = 1.0;

    void validate() const {
        if (points < 1 || points > 16) throw Error(ErrorCode::InvalidArgument, "P must be in [1, 16]");
        if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be > 0");
    }
    std::size_t bins() const { return std::size_t{1} << points; }
    int margin() const { return static_cast<int>(std::ceil(radius - 1e-9)); }
};

namespace detail {

inline double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

/// Neighbour offsets, p = 0 at angle 0, counter-clockwise on screen.
inline std::vector<std::pair<double, double>> neighbour_offsets(const LbpNeighbourhood& nb) {
    std::vector<std::pair<double, double>> out;
    for (int p = 0; p < nb.points; ++p) {
        const double a = 2.0 * std::numbers::pi * p / nb.points;
        out.emplace_back(snap(nb.radius * std::cos(a)), snap(-nb.radius * std::sin(a)));
    }
    return out;
}

/// Bilinear sample of (img - centre) at a fractional position. Differences are
/// taken before interpolation so a constant shift of the image is exact.
inline double sample_difference(const GrayImage& img, double fx, double fy, double centre) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0;
    const double ty = fy - y0;
    auto v = [&](int x, int y) { return img(x, y) - centre; };
    auto row = [&](int y) {
        const double a = v(x0, y);
        return tx == 0.0 ? a : a + tx * (v(x0 + 1, y) - a);
    };
    const double top = row(y0);
    return ty == 0.0 ? top : top + ty * (row(y0 + 1) - top);
}

inline bool codable(const GrayImage& img, int x, int y, int margin) {
    return x - margin >= 0 && y - margin >= 0 && x + margin < img.width() && y + margin < img.height();
}

inline void neighbour_differences(const GrayImage& img, int x, int y,
                                  const std::vector<std::pair<double, double>>& offsets,
                                  std::vector<double>& out) {
    out.clear();
    const double c = img(x, y);
    for (const auto& [ox, oy] : offsets) out.push_back(sample_difference(img, x + ox, y + oy, c));
}

}  // namespace detail

/// sum_p s(g_p - g_c) 2^p with s(x) = 1 for x >= 0.
inline unsigned lbp_code(const GrayImage& img, int x, int y, const LbpNeighbourhood& nb) {
    nb.validate();
    if (!detail::codable(img, x, y, nb.margin())) {
        throw Error(ErrorCode::OutOfBounds, "LBP neighbourhood leaves the image");
    }
    std::vector<double> diffs;
    detail::neighbour_differences(img, x, y, detail::neighbour_offsets(nb), diffs);
    unsigned code = 0;
    for (std::size_t p = 0; p < diffs.size(); ++p)
        if (diffs[p] >= 0.0) code |= 1u << p;
    return code;
}

struct LbpHistogram {
    LbpNeighbourhood neighbourhood;
    std::vector<std::size_t> bins;
    std::size_t coded_pixels = 0;
};

/// Histogram of codes over region pixels whose neighbourhood fits in the image.
inline LbpHistogram lbp_histogram(const GrayImage& img, const BinaryMask& region, const LbpNeighbourhood& nb) {
    nb.validate();
    require_same_shape(img, region, "lbp_histogram: shapes differ");
    require_nonempty(region);
    LbpHistogram h{nb, std::vector<std::size_t>(nb.bins(), 0), 0};
    const auto offsets = detail::neighbour_offsets(nb);
    std::vector<double> diffs;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!region(x, y) || !detail::codable(img, x, y, nb.margin())) continue;
            detail::neighbour_differences(img, x, y, offsets, diffs);
            unsigned code = 0;
            for (std::size_t p = 0; p < diffs.size(); ++p)
                if (diffs[p] >= 0.0) code |= 1u << p;
            ++h.bins[code];
            ++h.coded_pixels;
        }
    }
    return h;
}

/// Sign, magnitude and centre components, each L1-normalized to 1.
struct ClbpDescriptor {
    LbpHistogram sign;
    LbpHistogram magnitude;
    std::array<std::size_t, 2> center{};
    double magnitude_threshold = 0.0;
    double region_mean = 0.0;

    std::vector<double> vector() const {
        std::vector<double> v;
        v.reserve(sign.bins.size() + magnitude.bins.size() + 2);
        const double n = static_cast<double>(sign.coded_pixels);
        for (auto c : sign.bins) v.push_back(static_cast<double>(c) / n);
        for (auto c : magnitude.bins) v.push_back(static_cast<double>(c) / n);
        for (auto c : center) v.push_back(static_cast<double>(c) / n);
        return v;
    }
};

inline ClbpDescriptor clbp_descriptor(const GrayImage& img, const BinaryMask& region, const LbpNeighbourhood& nb) {
    nb.validate();
    require_same_shape(img, region, "clbp_descriptor: shapes differ");
    const double mean = region_mean_intensity(img, region);
    const auto offsets = detail::neighbour_offsets(nb);

    std::vector<std::vector<double>> all_diffs;
    std::vector<double> centres;
    std::vector<double> diffs;
    double abs_sum = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!region(x, y) || !detail::codable(img, x, y, nb.margin())) continue;
            detail::neighbour_differences(img, x, y, offsets, diffs);
            for (double d : diffs) abs_sum += std::abs(d);
            all_diffs.push_back(diffs);
            centres.push_back(img(x, y));
        }
    }
    if (all_diffs.empty()) throw Error(ErrorCode::EmptyRegion, "no codable pixels in region");

    ClbpDescriptor out;
    out.sign = {nb, std::vector<std::size_t>(nb.bins(), 0), all_diffs.size()};
    out.magnitude = {nb, std::vector<std::size_t>(nb.bins(), 0), all_diffs.size()};
    out.magnitude_threshold = abs_sum / static_cast<double>(all_diffs.size() * offsets.size());
    out.region_mean = mean;
    for (std::size_t i = 0; i < all_diffs.size(); ++i) {
        unsigned s = 0;
        unsigned m = 0;
        for (std::size_t p = 0; p < all_diffs[i].size(); ++p) {
            if (all_diffs[i][p] >= 0.0) s |= 1u << p;
            if (std::abs(all_diffs[i][p]) - out.magnitude_threshold >= 0.0) m |= 1u << p;
        }
        ++out.sign.bins[s];
        ++out.magnitude.bins[m];
        ++out.center[centres[i] - mean >= 0.0 ? 1 : 0];
    }
    return out;
}

}  // namespace nucleograde::features

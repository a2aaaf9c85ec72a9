#pragma once

// Brute-force reference implementations used only by the tests. They are
// deliberately written without the library's helpers.

#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "nucleograde/image.hpp"

namespace oracle {

using nucleograde::BinaryMask;
using nucleograde::GrayImage;

inline GrayImage random_image(int w, int h, std::mt19937& rng, double lo = 0.0, double hi = 255.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img(x, y) = d(rng);
    return img;
}

inline BinaryMask random_mask(int w, int h, std::mt19937& rng, double p = 0.5) {
    std::bernoulli_distribution d(p);
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m(x, y) = d(rng) ? 1 : 0;
    return m;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::array<double, 3> x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

/// Direct 2-D convolution with the truncated, renormalized 2-D Gaussian and
/// replicated borders.
inline GrayImage gaussian_direct(const GrayImage& img, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k;
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k.push_back(v);
            sum += v;
        }
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            std::size_t i = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx, ++i) {
                    const int sx = clampi(x + dx, 0, img.width() - 1);
                    const int sy = clampi(y + dy, 0, img.height() - 1);
                    acc += k[i] / sum * img(sx, sy);
                }
            out(x, y) = acc;
        }
    }
    return out;
}

inline GrayImage bilateral_direct(const GrayImage& img, double ss, double sr) {
    const int r = static_cast<int>(std::ceil(3.0 * ss));
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double num = 0.0;
            double den = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double v = img(clampi(x + dx, 0, img.width() - 1), clampi(y + dy, 0, img.height() - 1));
                    const double dv = v - img(x, y);
                    const double w =
                        std::exp(-(dx * dx + dy * dy) / (2.0 * ss * ss)) * std::exp(-dv * dv / (2.0 * sr * sr));
                    num += w * v;
                    den += w;
                }
            out(x, y) = num / den;
        }
    }
    return out;
}

/// Perona-Malik update written per cell with explicit border cases: a missing
/// neighbour contributes no flux.
inline GrayImage diffusion_direct(const GrayImage& img, int iterations, double kappa, double rate, bool unit = false) {
    GrayImage cur = img;
    for (int it = 0; it < iterations; ++it) {
        GrayImage next(cur.width(), cur.height());
        for (int y = 0; y < cur.height(); ++y) {
            for (int x = 0; x < cur.width(); ++x) {
                double total = 0.0;
                const int nx[4] = {x, x, x + 1, x - 1};
                const int ny[4] = {y - 1, y + 1, y, y};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= cur.width() || ny[k] >= cur.height()) continue;
                    const double d = cur(nx[k], ny[k]) - cur(x, y);
                    const double c = unit ? 1.0 : std::exp(-(d / kappa) * (d / kappa));
                    total += c * d;
                }
                next(x, y) = cur(x, y) + rate * total;
            }
        }
        cur = next;
    }
    return cur;
}

/// Background pixels 4-connected to the border stay background; all else is set.
inline BinaryMask fill_holes_flood(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<char> outside(static_cast<std::size_t>(w * h), 0);
    std::deque<std::pair<int, int>> q;
    auto push = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        if (m(x, y) || outside[static_cast<std::size_t>(y * w + x)]) return;
        outside[static_cast<std::size_t>(y * w + x)] = 1;
        q.emplace_back(x, y);
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        push(x + 1, y);
        push(x - 1, y);
        push(x, y + 1);
        push(x, y - 1);
    }
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(x, y) = outside[static_cast<std::size_t>(y * w + x)] ? 0 : 1;
    return out;
}

/// Flood-fill labelling; labels assigned in raster order of first pixel.
inline std::vector<int> flood_labels(const BinaryMask& m, bool eight, int& count) {
    const int w = m.width();
    const int h = m.height();
    std::vector<int> lab(static_cast<std::size_t>(w * h), 0);
    count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m(x, y) || lab[static_cast<std::size_t>(y * w + x)]) continue;
            ++count;
            std::deque<std::pair<int, int>> q{{x, y}};
            lab[static_cast<std::size_t>(y * w + x)] = count;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (!eight && dx != 0 && dy != 0) continue;
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h || !m(nx, ny)) continue;
                        auto& l = lab[static_cast<std::size_t>(ny * w + nx)];
                        if (l) continue;
                        l = count;
                        q.emplace_back(nx, ny);
                    }
            }
        }
    }
    return lab;
}

/// Erosion/dilation by direct definition with outside = background.
inline BinaryMask erode_direct(const BinaryMask& m, int r) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (int dy = -r; dy <= r && all; ++dy)
                for (int dx = -r; dx <= r && all; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    all = sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && m(sx, sy);
                }
            out(x, y) = all ? 1 : 0;
        }
    return out;
}

inline BinaryMask dilate_direct(const BinaryMask& m, int r) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool any = false;
            for (int dy = -r; dy <= r && !any; ++dy)
                for (int dx = -r; dx <= r && !any; ++dx) {
                    if (dx * dx + dy * dy > r * r) continue;
                    const int sx = x - dx;
                    const int sy = y - dy;
                    any = sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && m(sx, sy);
                }
            out(x, y) = any ? 1 : 0;
        }
    return out;
}

/// Perimeter by walking pixel centres around the outer boundary of a single
/// 8-connected blob: square tracing with a left-hand rule over pixel centres,
/// summing unit and diagonal steps. Works for blobs without one-pixel spurs
/// handled specially; used on rectangles and convex shapes.
inline double convex_centre_perimeter(const BinaryMask& m) {
    // For each row, the leftmost and rightmost pixel centres form the hull
    // chain of a row-convex, column-convex blob.
    std::vector<std::pair<int, int>> left;
    std::vector<std::pair<int, int>> right;
    for (int y = 0; y < m.height(); ++y) {
        int lo = -1;
        int hi = -1;
        for (int x = 0; x < m.width(); ++x)
            if (m(x, y)) {
                if (lo < 0) lo = x;
                hi = x;
            }
        if (lo >= 0) {
            left.emplace_back(lo, y);
            right.emplace_back(hi, y);
        }
    }
    auto chain = [](const std::vector<std::pair<int, int>>& pts) {
        double p = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            int dx = std::abs(pts[i].first - pts[i - 1].first);
            // A row step moves one diagonal (if dx >= 1) then horizontally.
            if (dx == 0) p += 1.0;
            else p += std::numbers::sqrt2 + (dx - 1);
        }
        return p;
    };
    double p = chain(left) + chain(right);
    p += right.front().first - left.front().first;
    p += right.back().first - left.back().first;
    return p;
}

/// LBP differences by bilinear interpolation of (img - centre), computed with
/// explicit corner weights.
inline std::vector<double> lbp_differences(const GrayImage& img, int x, int y, int P, double R) {
    std::vector<double> out;
    for (int p = 0; p < P; ++p) {
        const double a = 2.0 * std::numbers::pi * p / P;
        double fx = x + R * std::cos(a);
        double fy = y - R * std::sin(a);
        if (std::abs(fx - std::round(fx)) < 1e-9) fx = std::round(fx);
        if (std::abs(fy - std::round(fy)) < 1e-9) fy = std::round(fy);
        const int x0 = static_cast<int>(std::floor(fx));
        const int y0 = static_cast<int>(std::floor(fy));
        const double tx = fx - x0;
        const double ty = fy - y0;
        const double c = img(x, y);
        auto v = [&](int xx, int yy) {
            if (xx >= img.width() || yy >= img.height()) return 0.0;  // zero weight only
            return img(xx, yy) - c;
        };
        const double top = tx == 0.0 ? v(x0, y0) : v(x0, y0) + tx * (v(x0 + 1, y0) - v(x0, y0));
        const double bot = tx == 0.0 ? v(x0, y0 + 1) : v(x0, y0 + 1) + tx * (v(x0 + 1, y0 + 1) - v(x0, y0 + 1));
        out.push_back(ty == 0.0 ? top : top + ty * (bot - top));
    }
    return out;
}

/// Greedy nearest-first matching by repeated global minimum search.
inline std::size_t greedy_matches(const std::vector<nucleograde::Point>& pred,
                                  const std::vector<nucleograde::Point>& truth, double radius) {
    std::vector<bool> up(pred.size(), false);
    std::vector<bool> ut(truth.size(), false);
    std::size_t tp = 0;
    while (true) {
        double best = radius;
        int bi = -1;
        int bj = -1;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (up[i]) continue;
            for (std::size_t j = 0; j < truth.size(); ++j) {
                if (ut[j]) continue;
                const double d = std::hypot(pred[i].x - truth[j].x, pred[i].y - truth[j].y);
                if (d <= best && (bi < 0 || d < best)) {
                    best = d;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        if (bi < 0) return tp;
        up[static_cast<std::size_t>(bi)] = true;
        ut[static_cast<std::size_t>(bj)] = true;
        ++tp;
    }
}

}  // namespace oracle

#pragma once

/// @file morphology.hpp
/// @brief Binary morphology and connected-component labeling.
///
/// Pixels outside the image are background for every operation.

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <queue>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace nucleograde::morphology {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

/// Set of offsets relative to the element origin.
class StructuringElement {
public:
    /// dx^2 + dy^2 <= r^2.
    static StructuringElement disk(int radius) {
        if (radius < 1) throw Error(ErrorCode::InvalidArgument, "disk radius must be >= 1");
        StructuringElement se;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx)
                if (dx * dx + dy * dy <= radius * radius) se.offsets_.push_back({dx, dy});
        return se;
    }

    /// side x side, origin at the center (lower-left of center for even sides).
    static StructuringElement square(int side) {
        if (side < 1) throw Error(ErrorCode::InvalidArgument, "square side must be >= 1");
        StructuringElement se;
        const int lo = -(side / 2);
        for (int dy = lo; dy < lo + side; ++dy)
            for (int dx = lo; dx < lo + side; ++dx) se.offsets_.push_back({dx, dy});
        return se;
    }

    StructuringElement reflected() const {
        StructuringElement se;
        for (const auto& o : offsets_) se.offsets_.push_back({-o.dx, -o.dy});
        return se;
    }

    const std::vector<Offset>& offsets() const noexcept { return offsets_; }

    /// Largest |dx| or |dy| over the offsets.
    int extent() const noexcept {
        int e = 0;
        for (const auto& o : offsets_) e = std::max({e, std::abs(o.dx), std::abs(o.dy)});
        return e;
    }

private:
    std::vector<Offset> offsets_;
};

/// Pixel p stays iff p + b is foreground for every offset b.
inline BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool keep = true;
            for (const auto& o : se.offsets()) {
                const int xx = x + o.dx;
                const int yy = y + o.dy;
                if (!mask.contains(xx, yy) || !mask(xx, yy)) {
                    keep = false;
                    break;
                }
            }
            out(x, y) = keep ? 1 : 0;
        }
    }
    return out;
}

/// Minkowski sum: every foreground pixel stamps the element.
inline BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            for (const auto& o : se.offsets()) {
                const int xx = x + o.dx;
                const int yy = y + o.dy;
                if (out.contains(xx, yy)) out(xx, yy) = 1;
            }
        }
    }
    return out;
}

inline BinaryMask open(const BinaryMask& mask, const StructuringElement& se) {
    return dilate(erode(mask, se), se);
}

/// Evaluated on a canvas padded by the element extent so the dilation is not
/// clipped at the image edge; the result is cropped back.
inline BinaryMask close(const BinaryMask& mask, const StructuringElement& se) {
    const int pad = se.extent();
    BinaryMask padded(mask.width() + 2 * pad, mask.height() + 2 * pad);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) padded(x + pad, y + pad) = mask(x, y);
    const BinaryMask closed = erode(dilate(padded, se), se);
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out(x, y) = closed(x + pad, y + pad);
    return out;
}

/// Sets every background pixel not 4-connected to the border.
inline BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    BinaryMask outside(w, h);
    std::queue<std::pair<int, int>> frontier;
    auto seed = [&](int x, int y) {
        if (!mask(x, y) && !outside(x, y)) {
            outside(x, y) = 1;
            frontier.emplace(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    constexpr int kDx[4] = {1, -1, 0, 0};
    constexpr int kDy[4] = {0, 0, 1, -1};
    while (!frontier.empty()) {
        const auto [x, y] = frontier.front();
        frontier.pop();
        for (int k = 0; k < 4; ++k) {
            const int xx = x + kDx[k];
            const int yy = y + kDy[k];
            if (mask.contains(xx, yy)) seed(xx, yy);
        }
    }
    return complement(outside);
}

enum class Connectivity { Four = 4, Eight = 8 };

struct Component {
    int label = 0;
    std::size_t pixel_count = 0;
    Point centroid;
    Box bounding_box;
};

struct Labeling {
    /// 0 for background, otherwise the component label (1-based).
    Grid<int> labels;
    std::vector<Component> components;
};

namespace detail {

inline int find_root(std::vector<int>& parent, int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
        auto& p = parent[static_cast<std::size_t>(i)];
        p = parent[static_cast<std::size_t>(p)];
        i = p;
    }
    return i;
}

inline void unite(std::vector<int>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[static_cast<std::size_t>(a)] = b;
}

}  // namespace detail

/// Two-pass union-find labeling. Labels are ordered by the raster position of
/// each component's first pixel.
inline Labeling label_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight) {
    const int w = mask.width();
    const int h = mask.height();
    Grid<int> provisional(w, h, 0);
    std::vector<int> parent{0};

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y)) continue;
            int neighbours[4];
            int n = 0;
            if (x > 0 && provisional(x - 1, y)) neighbours[n++] = provisional(x - 1, y);
            if (y > 0 && provisional(x, y - 1)) neighbours[n++] = provisional(x, y - 1);
            if (conn == Connectivity::Eight && y > 0) {
                if (x > 0 && provisional(x - 1, y - 1)) neighbours[n++] = provisional(x - 1, y - 1);
                if (x + 1 < w && provisional(x + 1, y - 1)) neighbours[n++] = provisional(x + 1, y - 1);
            }
            if (n == 0) {
                const int id = static_cast<int>(parent.size());
                parent.push_back(id);
                provisional(x, y) = id;
                continue;
            }
            const int first = *std::min_element(neighbours, neighbours + n);
            provisional(x, y) = first;
            for (int i = 0; i < n; ++i) detail::unite(parent, first, neighbours[i]);
        }
    }

    // Provisional ids grow in raster order, so renumbering roots by first
    // appearance yields raster-ordered final labels.
    std::vector<int> final_label(parent.size(), 0);
    Labeling out{Grid<int>(w, h, 0), {}};
    struct Acc {
        std::size_t n = 0;
        double sx = 0.0;
        double sy = 0.0;
        Box box;
    };
    std::vector<Acc> acc;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int p = provisional(x, y);
            if (!p) continue;
            const int root = detail::find_root(parent, p);
            int& lbl = final_label[static_cast<std::size_t>(root)];
            if (!lbl) {
                acc.push_back({0, 0.0, 0.0, Box{x, y, x, y}});
                lbl = static_cast<int>(acc.size());
            }
            out.labels(x, y) = lbl;
            Acc& a = acc[static_cast<std::size_t>(lbl - 1)];
            ++a.n;
            a.sx += x;
            a.sy += y;
            a.box.x0 = std::min(a.box.x0, x);
            a.box.y0 = std::min(a.box.y0, y);
            a.box.x1 = std::max(a.box.x1, x);
            a.box.y1 = std::max(a.box.y1, y);
        }
    }
    out.components.reserve(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const auto& a = acc[i];
        const double n = static_cast<double>(a.n);
        out.components.push_back({static_cast<int>(i + 1), a.n, {a.sx / n, a.sy / n}, a.box});
    }
    return out;
}

inline std::vector<Component> connected_components(const BinaryMask& mask,
                                                   Connectivity conn = Connectivity::Eight) {
    return label_components(mask, conn).components;
}

/// Mask of one label from a labeling.
inline BinaryMask component_mask(const Labeling& lab, int label) {
    BinaryMask out(lab.labels.width(), lab.labels.height());
    auto lv = lab.labels.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = lv[i] == label ? 1 : 0;
    return out;
}

}  // namespace nucleograde::morphology

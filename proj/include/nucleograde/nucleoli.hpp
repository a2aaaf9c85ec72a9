#pragma once

/// @file nucleoli.hpp
/// @brief Nucleoli candidates inside a segmented nucleus and their
///        classification with a CLBP + linear SVM model.

#include <vector>

#include "features.hpp"
#include "filters.hpp"
#include "image.hpp"
#include "morphology.hpp"
#include "svm.hpp"

namespace nucleograde::features {

struct NucleoliParams {
    double bilateral_sigma_space = 2.0;
    double bilateral_sigma_range = 20.0;
    double gamma = 2.0;
    /// Candidate pixels are darker than this after gamma correction.
    double intensity_threshold = 100.0;
    int opening_radius = 1;
    /// Candidates at or above this circularity are the non-circular group.
    double circ_max = 20.0;
    /// Candidates covering more than this fraction of the nucleus are not nucleoli.
    double max_area_fraction = 0.25;
    LbpNeighbourhood lbp{8, 1.0};
    /// Descriptor support: disk of this radius around the candidate centroid.
    int patch_radius = 4;
    /// Label the model assigns to nucleoli.
    int nucleolus_label = 1;
};

struct NucleolusCandidate {
    /// Full-image coordinates.
    Point centroid;
    std::size_t area = 0;
    double circularity = 0.0;
};

inline GrayImage blue_channel(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    std::ranges::transform(img.values(), out.values().begin(), [](const Rgb& px) { return double(px.b); });
    return out;
}

/// Bilateral filter then gamma correction of the blue channel.
inline GrayImage nucleoli_enhance(const GrayImage& blue, const NucleoliParams& p) {
    return filters::gamma_correct(
        filters::bilateral_filter(blue, p.bilateral_sigma_space, p.bilateral_sigma_range), p.gamma);
}

/// CLBP vector over a disk patch centred on `centre` (clipped to the image).
inline std::vector<double> nucleoli_descriptor(const GrayImage& enhanced, Point centre, const NucleoliParams& p) {
    BinaryMask patch(enhanced.width(), enhanced.height());
    const int cx = static_cast<int>(std::lround(centre.x));
    const int cy = static_cast<int>(std::lround(centre.y));
    const int r = p.patch_radius;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r * r && patch.contains(cx + dx, cy + dy)) patch(cx + dx, cy + dy) = 1;
    if (count_true(patch) == 0) throw Error(ErrorCode::OutOfBounds, "descriptor centre outside image");
    return clbp_descriptor(enhanced, patch, p.lbp).vector();
}

namespace detail {

struct NucleusCrop {
    Box box;
    GrayImage enhanced;
    BinaryMask nucleus;
};

inline NucleusCrop nucleus_crop(const RgbImage& img, const Region& nucleus, const NucleoliParams& p) {
    if (nucleus.area() == 0) throw Error(ErrorCode::EmptyRegion, "nucleus has no pixels");
    const int margin = p.patch_radius + p.lbp.margin() + static_cast<int>(std::ceil(3.0 * p.bilateral_sigma_space));
    const Box box{std::max(0, nucleus.x0 - margin), std::max(0, nucleus.y0 - margin),
                  std::min(img.width() - 1, nucleus.x0 + nucleus.mask.width() - 1 + margin),
                  std::min(img.height() - 1, nucleus.y0 + nucleus.mask.height() - 1 + margin)};
    NucleusCrop c{box, nucleoli_enhance(blue_channel(crop(img, box)), p), BinaryMask(box.width(), box.height())};
    for (int y = 0; y < box.height(); ++y)
        for (int x = 0; x < box.width(); ++x) c.nucleus(x, y) = nucleus.at(box.x0 + x, box.y0 + y) ? 1 : 0;
    return c;
}

/// Candidates in crop coordinates.
inline std::vector<NucleolusCandidate> candidates_in(const NucleusCrop& c, const NucleoliParams& p) {
    BinaryMask dark = mask_and(filters::threshold_below(c.enhanced, p.intensity_threshold), c.nucleus);
    dark = morphology::open(dark, morphology::StructuringElement::disk(p.opening_radius));
    const double nucleus_area = static_cast<double>(count_true(c.nucleus));

    std::vector<NucleolusCandidate> out;
    const auto lab = morphology::label_components(dark, morphology::Connectivity::Eight);
    for (const auto& comp : lab.components) {
        if (static_cast<double>(comp.pixel_count) > p.max_area_fraction * nucleus_area) continue;
        const double circ = region_circularity(morphology::component_mask(lab, comp.label));
        if (circ >= p.circ_max) continue;
        out.push_back({comp.centroid, comp.pixel_count, circ});
    }
    return out;
}

}  // namespace detail

/// Dark, opened, circular blobs inside the nucleus.
inline std::vector<NucleolusCandidate> nucleoli_candidates(const RgbImage& img, const Region& nucleus,
                                                           const NucleoliParams& p) {
    const auto c = detail::nucleus_crop(img, nucleus, p);
    auto out = detail::candidates_in(c, p);
    for (auto& cand : out) {
        cand.centroid.x += c.box.x0;
        cand.centroid.y += c.box.y0;
    }
    return out;
}

/// Number of candidates the model labels as nucleoli.
inline int detect_nucleoli(const RgbImage& img, const Region& nucleus, const LinearSvmModel& model,
                           const NucleoliParams& p) {
    const auto c = detail::nucleus_crop(img, nucleus, p);
    int count = 0;
    for (const auto& cand : detail::candidates_in(c, p)) {
        if (svm_predict(model, nucleoli_descriptor(c.enhanced, cand.centroid, p)) == p.nucleolus_label) ++count;
    }
    return count;
}

/// Descriptor for a training annotation at full-image coordinates.
inline std::vector<double> nucleoli_training_sample(const RgbImage& img, Point at, const NucleoliParams& p) {
    const int r = p.patch_radius + p.lbp.margin() + static_cast<int>(std::ceil(3.0 * p.bilateral_sigma_space));
    const int cx = static_cast<int>(std::lround(at.x));
    const int cy = static_cast<int>(std::lround(at.y));
    if (!img.contains(cx, cy)) throw Error(ErrorCode::OutOfBounds, "annotation outside image");
    const Box box{std::max(0, cx - r), std::max(0, cy - r), std::min(img.width() - 1, cx + r),
                  std::min(img.height() - 1, cy + r)};
    const GrayImage enhanced = nucleoli_enhance(blue_channel(crop(img, box)), p);
    return nucleoli_descriptor(enhanced, {at.x - box.x0, at.y - box.y0}, p);
}

}  // namespace nucleograde::features

#pragma once

/// @file detect.hpp
/// @brief First segmentation level: H-channel preprocessing to an edge
///        image, nucleus-center detection and initial-contour construction.

#include <vector>

#include "filters.hpp"
#include "image.hpp"
#include "morphology.hpp"
#include "stains.hpp"

namespace nucleograde::detect {

struct PreprocessParams {
    stains::StainMatrix stains = stains::StainMatrix::default_he();
    stains::SeparationOptions separation;
    filters::DiffusionParams diffusion;
    double log_sigma = 2.0;
    /// Pixels with LoG response above this are edge pixels.
    double log_threshold = 0.5;
};

struct CenterParams {
    int closing_radius = 3;
    /// Erosion element radius; the size of a healthy nucleus.
    int r_healthy = 6;
    filters::DoGParams dog;
    /// Applied to the DoG response after a min-max rescale to [0, 255].
    double dog_threshold = 200.0;
    /// Components smaller than this are discarded.
    std::size_t min_blob_area = 2;
};

struct ContourParams {
    int r_seed = 6;
    int closing_radius = 3;
};

struct PreprocessOutput {
    GrayImage h_channel;
    GrayImage diffused;
    BinaryMask edge_binary;
};

struct NucleusSeed {
    Point center;
    std::size_t source_blob_area = 0;
};

inline PreprocessOutput preprocess(const RgbImage& img, const PreprocessParams& p) {
    if (img.width() == 0 || img.height() == 0) {
        throw Error(ErrorCode::InvalidImage, "image has zero size");
    }
    PreprocessOutput out;
    out.h_channel = stains::separate_hematoxylin(img, p.stains, p.separation);
    out.diffused = filters::anisotropic_diffusion(out.h_channel, p.diffusion);
    out.edge_binary = filters::threshold(filters::log_filter(out.diffused, p.log_sigma), p.log_threshold);
    return out;
}

/// close -> fill -> erode(r_healthy). Isolated healthy-sized objects vanish here.
inline BinaryMask center_morphology(const BinaryMask& edge_binary, const CenterParams& p) {
    using namespace morphology;
    const BinaryMask filled =
        fill_holes(close(edge_binary, StructuringElement::disk(p.closing_radius)));
    return erode(filled, StructuringElement::disk(p.r_healthy));
}

/// DoG response rescaled to [0, 255], thresholded.
inline BinaryMask center_blobs(const BinaryMask& eroded, const CenterParams& p) {
    p.dog.validate();
    const GrayImage response = rescale(filters::dog_filter(mask_to_gray(eroded), p.dog));
    return filters::threshold(response, p.dog_threshold);
}

inline std::vector<NucleusSeed> detect_centers(const PreprocessOutput& pre, const CenterParams& p) {
    const BinaryMask eroded = center_morphology(pre.edge_binary, p);
    if (count_true(eroded) == 0) return {};
    std::vector<NucleusSeed> seeds;
    for (const auto& c : morphology::connected_components(center_blobs(eroded, p))) {
        if (c.pixel_count < p.min_blob_area) continue;
        seeds.push_back({c.centroid, c.pixel_count});
    }
    return seeds;
}

/// Mask the initial contour may occupy: the closed and filled edge image.
inline BinaryMask support_mask(const BinaryMask& edge_binary, int closing_radius) {
    using namespace morphology;
    return fill_holes(close(edge_binary, StructuringElement::disk(closing_radius)));
}

inline BinaryMask build_initial_contour(const std::vector<NucleusSeed>& seeds,
                                        const PreprocessOutput& pre, const ContourParams& p) {
    using namespace morphology;
    const int w = pre.edge_binary.width();
    const int h = pre.edge_binary.height();
    BinaryMask points(w, h);
    for (const auto& s : seeds) {
        const int x = static_cast<int>(std::lround(s.center.x));
        const int y = static_cast<int>(std::lround(s.center.y));
        if (!points.contains(x, y)) throw Error(ErrorCode::OutOfBounds, "seed outside image");
        points(x, y) = 1;
    }
    const BinaryMask product = mask_and(dilate(points, StructuringElement::disk(p.r_seed)),
                                        support_mask(pre.edge_binary, p.closing_radius));
    return fill_holes(close(product, StructuringElement::disk(p.closing_radius)));
}

}  // namespace nucleograde::detect

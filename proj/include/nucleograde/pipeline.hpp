#pragma once

/// @file pipeline.hpp
/// @brief End-to-end orchestration: quartering, per-quarter detection,
///        segmentation, features and scoring, and ground-truth matching.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "detect.hpp"
#include "features.hpp"
#include "image.hpp"
#include "levelset.hpp"
#include "nucleoli.hpp"
#include "scoring.hpp"
#include "svm.hpp"

namespace nucleograde::pipeline {

struct PipelineConfig {
    detect::PreprocessParams preprocess;
    detect::CenterParams centers;
    detect::ContourParams contour;
    levelset::SegmentParams segment;
    features::NucleoliParams nucleoli;
    scoring::ScoringParams scoring;
    /// Explicit baseline; otherwise measured from `baseline_annotations`.
    std::optional<scoring::NormalBaseline> baseline;
    std::string baseline_annotations;
    /// Replace r_healthy (and r_seed) with the radius of the measured normal area.
    bool derive_r_healthy = false;
    std::string nucleoli_model;
    double match_radius = 8.0;
    bool quarter = true;
    int workers = 1;

    void validate() const {
        preprocess.diffusion.validate();
        centers.dog.validate();
        segment.drlse.validate();
        preprocess.stains.unmix({0.0, 0.0, 0.0});
        nucleoli.lbp.validate();
        if (!(preprocess.log_sigma > 0.0)) throw Error(ErrorCode::ConfigError, "log sigma must be > 0");
        if (centers.r_healthy < 1 || centers.closing_radius < 1 || contour.r_seed < 1 || contour.closing_radius < 1) {
            throw Error(ErrorCode::ConfigError, "morphology radii must be >= 1");
        }
        if (!(segment.edge_sigma > 0.0) || segment.padding < 0 || !(segment.c0 > 0.0)) {
            throw Error(ErrorCode::ConfigError, "invalid segmentation parameters");
        }
        if (!(match_radius > 0.0)) throw Error(ErrorCode::ConfigError, "match radius must be > 0");
        if (workers < 1) throw Error(ErrorCode::ConfigError, "workers must be >= 1");
        if (baseline) baseline->validate();
    }
};

// ---------------------------------------------------------------------------
// Quartering
// ---------------------------------------------------------------------------

struct Quarter {
    /// Top-left corner in the source image.
    int x0 = 0;
    int y0 = 0;
    RgbImage image;
};

/// Top-left, top-right, bottom-left, bottom-right; split at floor(w/2),
/// floor(h/2) so odd remainders go right and down.
inline std::array<Quarter, 4> quarter_image(const RgbImage& img) {
    if (img.width() < 2 || img.height() < 2) throw Error(ErrorCode::ImageTooSmall, "quartering needs at least 2x2");
    const int hw = img.width() / 2;
    const int hh = img.height() / 2;
    const int W = img.width() - 1;
    const int H = img.height() - 1;
    const std::array<Box, 4> boxes{Box{0, 0, hw - 1, hh - 1}, Box{hw, 0, W, hh - 1}, Box{0, hh, hw - 1, H},
                                   Box{hw, hh, W, H}};
    std::array<Quarter, 4> out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = {boxes[i].x0, boxes[i].y0, crop(img, boxes[i])};
    return out;
}

inline RgbImage assemble_quarters(const std::array<Quarter, 4>& q) {
    const int w = q[1].x0 + q[1].image.width();
    const int h = q[2].y0 + q[2].image.height();
    RgbImage out(w, h);
    for (const auto& part : q)
        for (int y = 0; y < part.image.height(); ++y)
            for (int x = 0; x < part.image.width(); ++x) out(part.x0 + x, part.y0 + y) = part.image(x, y);
    return out;
}

// ---------------------------------------------------------------------------
// Per-image pipeline
// ---------------------------------------------------------------------------

struct NucleusRecord {
    int id = 0;
    /// Full-image coordinates.
    Point centroid;
    Region region;
    features::NucleusFeatures features;
    bool darker_than_normal = false;
    bool irregular_contour = false;
    bool enlarged = false;
    std::vector<std::array<int, 2>> polygon;
};

struct StageFailure {
    std::string stage;
    std::string message;
};

struct QuarterResult {
    int index = 0;
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    /// Full-image coordinates.
    std::vector<detect::NucleusSeed> seeds;
    std::vector<NucleusRecord> nuclei;
    std::optional<scoring::CriterionScores> criteria;
    std::optional<int> score;
    /// "ok", "EmptyPopulation", "NoBaseline" or "failed".
    std::string status = "ok";
    std::vector<StageFailure> failures;
};

namespace detail {

inline std::vector<std::array<int, 2>> region_polygon(const Region& r) {
    std::vector<std::array<int, 2>> pts;
    int sx = -1;
    int sy = -1;
    for (int y = 0; y < r.mask.height() && sx < 0; ++y)
        for (int x = 0; x < r.mask.width(); ++x)
            if (r.mask(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) return pts;
    int x = sx;
    int y = sy;
    pts.push_back({r.x0 + x, r.y0 + y});
    const auto chain = features::trace_boundary(r.mask);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        x += features::detail::kDx[chain[i]];
        y += features::detail::kDy[chain[i]];
        pts.push_back({r.x0 + x, r.y0 + y});
    }
    return pts;
}

inline features::NucleusFeatures measure(const Region& region, const GrayImage& h_channel, const RgbImage& rgb,
                                         const features::LinearSvmModel* model,
                                         const features::NucleoliParams& nucleoli) {
    features::NucleusFeatures f;
    const Box box{region.x0, region.y0, region.x0 + region.mask.width() - 1, region.y0 + region.mask.height() - 1};
    f.area = features::region_area(region.mask);
    f.mean_intensity = features::region_mean_intensity(crop(h_channel, box), region.mask);
    f.circularity = features::region_circularity(region.mask);
    f.nucleoli_count = model ? features::detect_nucleoli(rgb, region, *model, nucleoli) : 0;
    return f;
}

inline Point region_centroid(const Region& r) {
    double sx = 0.0;
    double sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < r.mask.height(); ++y)
        for (int x = 0; x < r.mask.width(); ++x)
            if (r.mask(x, y)) {
                sx += r.x0 + x;
                sy += r.y0 + y;
                ++n;
            }
    return n ? Point{sx / static_cast<double>(n), sy / static_cast<double>(n)} : Point{};
}

}  // namespace detail

/// Detection, segmentation and features for one image, without scoring.
/// Coordinates in the result are relative to `img`.
struct Segmentation {
    detect::PreprocessOutput pre;
    std::vector<detect::NucleusSeed> seeds;
    BinaryMask initial;
    std::vector<NucleusRecord> nuclei;
    std::vector<StageFailure> failures;
};

inline Segmentation segment_image(const RgbImage& img, const PipelineConfig& cfg,
                                  const features::LinearSvmModel* model = nullptr) {
    Segmentation s;
    s.pre = detect::preprocess(img, cfg.preprocess);
    s.seeds = detect::detect_centers(s.pre, cfg.centers);
    s.initial = detect::build_initial_contour(s.seeds, s.pre, cfg.contour);
    auto seg = levelset::segment_nuclei(s.initial, s.pre.diffused, cfg.segment);
    for (const auto& f : seg.failures) s.failures.push_back({"segment", f.message});
    int id = 0;
    for (auto& region : seg.nuclei) {
        try {
            NucleusRecord rec;
            rec.features = detail::measure(region, s.pre.h_channel, img, model, cfg.nucleoli);
            rec.centroid = detail::region_centroid(region);
            rec.polygon = detail::region_polygon(region);
            rec.region = std::move(region);
            rec.id = ++id;
            s.nuclei.push_back(std::move(rec));
        } catch (const Error& e) {
            s.failures.push_back({"features", e.what()});
        }
    }
    return s;
}

inline void flag_nuclei(std::vector<NucleusRecord>& nuclei, const scoring::NormalBaseline& base,
                        const scoring::ScoringParams& p) {
    for (auto& n : nuclei) {
        n.darker_than_normal = n.features.mean_intensity < base.normal_mean_intensity - p.chromatin_margin;
        n.irregular_contour = n.features.circularity > base.normal_circularity * (1.0 + p.contour_margin_ratio);
        n.enlarged = n.features.area > 3.0 * base.normal_area;
    }
}

/// Full pipeline on one quarter (or one whole image).
inline QuarterResult run_pipeline(const RgbImage& img, const PipelineConfig& cfg,
                                  const std::optional<scoring::NormalBaseline>& baseline,
                                  const features::LinearSvmModel* model = nullptr, int x0 = 0, int y0 = 0,
                                  int index = 0) {
    QuarterResult q;
    q.index = index;
    q.x0 = x0;
    q.y0 = y0;
    q.width = img.width();
    q.height = img.height();
    Segmentation s;
    try {
        s = segment_image(img, cfg, model);
    } catch (const Error& e) {
        q.status = "failed";
        q.failures.push_back({"preprocess", e.what()});
        return q;
    }
    q.failures = std::move(s.failures);
    for (auto seed : s.seeds) {
        seed.center.x += x0;
        seed.center.y += y0;
        q.seeds.push_back(seed);
    }
    for (auto& n : s.nuclei) {
        n.centroid.x += x0;
        n.centroid.y += y0;
        n.region.x0 += x0;
        n.region.y0 += y0;
        for (auto& pt : n.polygon) {
            pt[0] += x0;
            pt[1] += y0;
        }
    }
    q.nuclei = std::move(s.nuclei);
    if (!baseline) {
        q.status = "NoBaseline";
        return q;
    }
    if (q.nuclei.empty()) {
        q.status = "EmptyPopulation";
        return q;
    }
    flag_nuclei(q.nuclei, *baseline, cfg.scoring);
    std::vector<features::NucleusFeatures> feats;
    for (const auto& n : q.nuclei) feats.push_back(n.features);
    q.criteria = scoring::score_criteria(feats, *baseline, cfg.scoring);
    q.score = scoring::quarter_score(*q.criteria);
    return q;
}

struct ImageResult {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<QuarterResult> quarters;
    /// Absent when no quarter could be scored.
    std::optional<int> slide_score;

    bool has_failures() const {
        return std::ranges::any_of(quarters, [](const QuarterResult& q) { return !q.failures.empty(); });
    }

    std::vector<Point> seed_points() const {
        std::vector<Point> pts;
        for (const auto& q : quarters)
            for (const auto& s : q.seeds) pts.push_back(s.center);
        return pts;
    }
};

/// Quarters without a score count as 1 toward the slide score; the slide
/// score is absent when no quarter was scored. Unquartered images use their
/// single score.
inline std::optional<int> aggregate_slide_score(const std::vector<QuarterResult>& quarters) {
    std::vector<int> scores;
    bool any = false;
    for (const auto& q : quarters) {
        scores.push_back(q.score.value_or(1));
        any |= q.score.has_value();
    }
    if (!any) return std::nullopt;
    if (scores.size() == 1) return scores.front();
    return scoring::slide_score(scores);
}

inline ImageResult process_image(const std::string& image_id, const RgbImage& img, const PipelineConfig& cfg,
                                 const std::optional<scoring::NormalBaseline>& baseline,
                                 const features::LinearSvmModel* model = nullptr) {
    if (img.width() == 0 || img.height() == 0) throw Error(ErrorCode::InvalidImage, "image has zero size");
    ImageResult r;
    r.image_id = image_id;
    r.width = img.width();
    r.height = img.height();
    if (cfg.quarter) {
        const auto parts = quarter_image(img);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            r.quarters.push_back(
                run_pipeline(parts[i].image, cfg, baseline, model, parts[i].x0, parts[i].y0, static_cast<int>(i)));
        }
    } else {
        r.quarters.push_back(run_pipeline(img, cfg, baseline, model));
    }
    int id = 0;
    for (auto& q : r.quarters)
        for (auto& n : q.nuclei) n.id = ++id;
    r.slide_score = aggregate_slide_score(r.quarters);
    return r;
}

/// Features of annotated healthy nuclei, seeded directly at the given centres.
inline std::vector<features::NucleusFeatures> measure_healthy(const RgbImage& img,
                                                              const std::vector<Point>& healthy_centers,
                                                              const PipelineConfig& cfg,
                                                              const features::LinearSvmModel* model = nullptr) {
    const auto pre = detect::preprocess(img, cfg.preprocess);
    std::vector<detect::NucleusSeed> seeds;
    for (const auto& c : healthy_centers) seeds.push_back({c, 1});
    const auto initial = detect::build_initial_contour(seeds, pre, cfg.contour);
    const auto seg = levelset::segment_nuclei(initial, pre.diffused, cfg.segment);
    std::vector<features::NucleusFeatures> feats;
    for (const auto& region : seg.nuclei) feats.push_back(detail::measure(region, pre.h_channel, img, model, cfg.nucleoli));
    return feats;
}

/// Per-feature medians over the segmented healthy nuclei.
inline scoring::NormalBaseline measure_baseline(const RgbImage& img, const std::vector<Point>& healthy_centers,
                                                const PipelineConfig& cfg,
                                                const features::LinearSvmModel* model = nullptr) {
    if (healthy_centers.empty()) throw Error(ErrorCode::EmptyAnnotation, "no healthy nuclei annotated");
    const auto feats = measure_healthy(img, healthy_centers, cfg, model);
    if (feats.empty()) throw Error(ErrorCode::EmptyAnnotation, "no annotated healthy nucleus could be segmented");
    return scoring::baseline_from_features(feats);
}

/// Radius of a disk with the baseline area, at least 1.
inline int healthy_radius(const scoring::NormalBaseline& b) {
    return std::max(1, static_cast<int>(std::lround(std::sqrt(b.normal_area / std::numbers::pi))));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Greedy one-to-one matching, closest pairs first (ties by index).
/// tn is always 0: detection has no countable true negatives.
inline scoring::EvalCounts match_centers(const std::vector<Point>& predicted, const std::vector<Point>& truth,
                                         double match_radius) {
    struct Pair {
        double d;
        std::size_t p;
        std::size_t t;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
            const double d = std::hypot(predicted[i].x - truth[j].x, predicted[i].y - truth[j].y);
            if (d <= match_radius) pairs.push_back({d, i, j});
        }
    }
    std::ranges::sort(pairs, [](const Pair& a, const Pair& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.p != b.p) return a.p < b.p;
        return a.t < b.t;
    });
    std::vector<bool> used_p(predicted.size(), false);
    std::vector<bool> used_t(truth.size(), false);
    scoring::EvalCounts c;
    for (const auto& pr : pairs) {
        if (used_p[pr.p] || used_t[pr.t]) continue;
        used_p[pr.p] = used_t[pr.t] = true;
        ++c.tp;
    }
    c.fp = predicted.size() - c.tp;
    c.fn = truth.size() - c.tp;
    return c;
}

struct GroundTruth {
    /// image id -> centres.
    std::vector<std::pair<std::string, std::vector<Point>>> centers;
    /// image id -> slide score.
    std::vector<std::pair<std::string, int>> slide_scores;

    const std::vector<Point>* centers_for(const std::string& id) const {
        for (const auto& [k, v] : centers)
            if (k == id) return &v;
        return nullptr;
    }
    std::optional<int> score_for(const std::string& id) const {
        for (const auto& [k, v] : slide_scores)
            if (k == id) return v;
        return std::nullopt;
    }
};

struct Prediction {
    std::string image_id;
    std::vector<Point> centers;
    std::optional<int> slide_score;
};

struct Evaluation {
    scoring::EvalCounts detection;
    scoring::ConfusionMatrix slide_confusion;
    std::size_t scored_images = 0;
    std::vector<std::string> unscored_images;
};

/// Every prediction needs ground-truth centres; slide scores are compared
/// where both sides have one.
inline Evaluation evaluate(const std::vector<Prediction>& predictions, const GroundTruth& gt, double match_radius) {
    Evaluation ev;
    std::vector<int> pred_scores;
    std::vector<int> true_scores;
    for (const auto& p : predictions) {
        const auto* truth = gt.centers_for(p.image_id);
        if (!truth) throw Error(ErrorCode::MissingGroundTruth, "no ground-truth centres for " + p.image_id);
        const auto c = match_centers(p.centers, *truth, match_radius);
        ev.detection.tp += c.tp;
        ev.detection.fp += c.fp;
        ev.detection.fn += c.fn;
        const auto ts = gt.score_for(p.image_id);
        if (ts && p.slide_score) {
            pred_scores.push_back(*p.slide_score);
            true_scores.push_back(*ts);
        } else if (ts) {
            ev.unscored_images.push_back(p.image_id);
        }
    }
    ev.slide_confusion = scoring::confusion_matrix(pred_scores, true_scores);
    ev.scored_images = pred_scores.size();
    return ev;
}

}  // namespace nucleograde::pipeline

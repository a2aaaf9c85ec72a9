#pragma once

/// @file report.hpp
/// @brief JSON serialization of per-image results and the merged run report.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "pipeline.hpp"

namespace nucleograde::report {

using nlohmann::json;

inline constexpr const char* kSchema = "nucleograde/1";

namespace detail {

template <typename T>
json optional_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline json to_json(const scoring::NormalBaseline& b) {
    return {{"normal_area", b.normal_area},
            {"normal_mean_intensity", b.normal_mean_intensity},
            {"normal_circularity", b.normal_circularity},
            {"normal_nucleoli", b.normal_nucleoli}};
}

inline json to_json(const scoring::CriterionScores& c) {
    return {{"anisonucleosis", c.anisonucleosis},
            {"chromatin", c.chromatin},
            {"contour", c.contour},
            {"nucleoli", c.nucleoli}};
}

inline json to_json(const pipeline::NucleusRecord& n) {
    json poly = json::array();
    for (const auto& p : n.polygon) poly.push_back({p[0], p[1]});
    return {{"id", n.id},
            {"centroid", {n.centroid.x, n.centroid.y}},
            {"area", n.features.area},
            {"mean_intensity", n.features.mean_intensity},
            {"circularity", n.features.circularity},
            {"nucleoli_count", n.features.nucleoli_count},
            {"darker_than_normal", n.darker_than_normal},
            {"irregular_contour", n.irregular_contour},
            {"enlarged", n.enlarged},
            {"polygon", std::move(poly)}};
}

inline json to_json(const pipeline::QuarterResult& q) {
    json seeds = json::array();
    for (const auto& s : q.seeds) seeds.push_back({s.center.x, s.center.y});
    json nuclei = json::array();
    for (const auto& n : q.nuclei) nuclei.push_back(to_json(n));
    json failures = json::array();
    for (const auto& f : q.failures) failures.push_back({{"stage", f.stage}, {"message", f.message}});
    return {{"index", q.index},
            {"origin", {q.x0, q.y0}},
            {"size", {q.width, q.height}},
            {"status", q.status},
            {"criteria", q.criteria ? to_json(*q.criteria) : json(nullptr)},
            {"quarter_score", detail::optional_value(q.score)},
            {"seeds", std::move(seeds)},
            {"nuclei", std::move(nuclei)},
            {"failures", std::move(failures)}};
}

inline json metadata() {
    return {{"recall", "tp / (tp + fn)"},
            {"detection_tn", "always 0; detection has no countable true negatives"},
            {"quarter_score", "max of the four criterion scores"},
            {"unscored_quarter", "counts as 1 in the slide score"}};
}

/// Per-image document.
inline json image_report(const pipeline::ImageResult& r, const std::string& config_hash,
                         const std::optional<scoring::NormalBaseline>& baseline) {
    json quarters = json::array();
    for (const auto& q : r.quarters) quarters.push_back(to_json(q));
    return {{"schema", kSchema},
            {"image_id", r.image_id},
            {"width", r.width},
            {"height", r.height},
            {"config_hash", config_hash},
            {"baseline", baseline ? to_json(*baseline) : json(nullptr)},
            {"slide_score", detail::optional_value(r.slide_score)},
            {"quarters", std::move(quarters)},
            {"metadata", metadata()}};
}

inline json to_json(const scoring::EvalCounts& c) {
    json j = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
    if (c.tp + c.fp > 0 && c.tp + c.fn > 0) {
        const auto pr = scoring::precision_recall_f(c);
        j["precision"] = pr.precision;
        j["recall"] = pr.recall;
        j["f_measure"] = pr.f_measure;
        j["f_defined"] = pr.f_defined;
    } else {
        j["precision"] = c.tp + c.fp > 0 ? json(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp))
                                         : json(nullptr);
        j["recall"] = c.tp + c.fn > 0 ? json(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn))
                                      : json(nullptr);
        j["f_measure"] = 0.0;
        j["f_defined"] = false;
    }
    return j;
}

inline json to_json(const pipeline::Evaluation& ev) {
    json j;
    j["detection"] = to_json(ev.detection);
    const auto& m = ev.slide_confusion;
    json slide = {{"images", ev.scored_images}, {"unscored_images", ev.unscored_images}};
    json cells = json::array();
    for (const auto& row : m.cells) cells.push_back({row[0], row[1], row[2]});
    slide["confusion"] = std::move(cells);
    slide["accuracy"] = m.total() ? json(m.accuracy()) : json(nullptr);
    json per_class = json::object();
    for (int cls = 1; cls <= 3; ++cls) {
        const auto c = m.one_vs_rest(cls);
        per_class[std::to_string(cls)] = {
            {"recall", m.truth_count(cls) ? json(m.class_accuracy(cls)) : json(nullptr)},
            {"one_vs_rest_accuracy", m.total() ? json(scoring::accuracy(c)) : json(nullptr)}};
    }
    slide["per_class"] = std::move(per_class);
    j["slide_scores"] = std::move(slide);
    return j;
}

/// Merged document over all images, in the order given.
inline json run_report(const std::vector<json>& images, const pipeline::PipelineConfig& cfg,
                       const std::optional<scoring::NormalBaseline>& baseline,
                       const std::optional<pipeline::Evaluation>& evaluation) {
    json summary = json::array();
    for (const auto& img : images) {
        json quarter_scores = json::array();
        std::size_t nuclei = 0;
        for (const auto& q : img["quarters"]) {
            quarter_scores.push_back(q["quarter_score"]);
            nuclei += q["nuclei"].size();
        }
        summary.push_back({{"image_id", img["image_id"]},
                           {"slide_score", img["slide_score"]},
                           {"quarter_scores", std::move(quarter_scores)},
                           {"nuclei", nuclei}});
    }
    return {{"schema", kSchema},
            {"config_hash", config::config_hash(cfg)},
            {"config", config::to_json(cfg)},
            {"baseline", baseline ? to_json(*baseline) : json(nullptr)},
            {"images", std::move(summary)},
            {"metrics", evaluation ? to_json(*evaluation) : json(nullptr)},
            {"metadata", metadata()}};
}

/// Stable text form: two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace nucleograde::report

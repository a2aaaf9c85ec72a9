#pragma once

/// @file scoring.hpp
/// @brief Nuclear pleomorphism rubric, quarter/slide aggregation and
///        evaluation metrics.
///
/// Scores are plain ints in {1, 2, 3}.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "features.hpp"

namespace nucleograde::scoring {

using features::NucleusFeatures;

struct NormalBaseline {
    double normal_area = 0.0;
    double normal_mean_intensity = 0.0;
    double normal_circularity = 0.0;
    double normal_nucleoli = 0.0;

    void validate() const {
        if (!(normal_area > 0.0 && normal_mean_intensity > 0.0 && normal_circularity > 0.0) ||
            !(normal_nucleoli >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "baseline features must be positive");
        }
    }
};

struct ScoringParams {
    /// Darker than baseline by more than this counts as denser chromatin.
    double chromatin_margin = 10.0;
    /// Circularity above baseline * (1 + ratio) counts as irregular.
    double contour_margin_ratio = 0.15;
    /// Area coefficient of variation above this means irregular sizes.
    double cv3 = 0.5;
};

struct CriterionScores {
    int anisonucleosis = 1;
    int chromatin = 1;
    int contour = 1;
    int nucleoli = 1;
    friend bool operator==(const CriterionScores&, const CriterionScores&) = default;
};

/// <= 30% -> 1, <= 60% -> 2, otherwise 3.
inline int score_fraction(double frac) {
    if (!(frac >= 0.0 && frac <= 1.0)) throw Error(ErrorCode::OutOfRange, "fraction must lie in [0, 1]");
    if (frac <= 0.30) return 1;
    if (frac <= 0.60) return 2;
    return 3;
}

namespace detail {

inline void require_population(std::span<const NucleusFeatures> nuclei) {
    if (nuclei.empty()) throw Error(ErrorCode::EmptyPopulation, "no nuclei to score");
}

template <typename Pred>
double fraction_where(std::span<const NucleusFeatures> nuclei, Pred pred) {
    const auto n = std::ranges::count_if(nuclei, pred);
    return static_cast<double>(n) / static_cast<double>(nuclei.size());
}

inline bool irregular(const NucleusFeatures& f, const NormalBaseline& base, const ScoringParams& p) {
    return f.circularity > base.normal_circularity * (1.0 + p.contour_margin_ratio);
}

}  // namespace detail

inline int score_chromatin(std::span<const NucleusFeatures> nuclei, const NormalBaseline& base,
                           const ScoringParams& p = {}) {
    detail::require_population(nuclei);
    return score_fraction(detail::fraction_where(nuclei, [&](const NucleusFeatures& f) {
        return f.mean_intensity < base.normal_mean_intensity - p.chromatin_margin;
    }));
}

inline int score_contour(std::span<const NucleusFeatures> nuclei, const NormalBaseline& base,
                         const ScoringParams& p = {}) {
    detail::require_population(nuclei);
    return score_fraction(
        detail::fraction_where(nuclei, [&](const NucleusFeatures& f) { return detail::irregular(f, base, p); }));
}

inline int score_nucleoli(std::span<const NucleusFeatures> nuclei, const NormalBaseline& /*base*/,
                          const ScoringParams& /*p*/ = {}) {
    detail::require_population(nuclei);
    return score_fraction(
        detail::fraction_where(nuclei, [](const NucleusFeatures& f) { return f.nucleoli_count >= 1; }));
}

/// Coefficient of variation (population standard deviation / mean) of areas.
inline double area_cv(std::span<const NucleusFeatures> nuclei) {
    detail::require_population(nuclei);
    double mean = 0.0;
    for (const auto& f : nuclei) mean += f.area;
    mean /= static_cast<double>(nuclei.size());
    double var = 0.0;
    for (const auto& f : nuclei) var += (f.area - mean) * (f.area - mean);
    var /= static_cast<double>(nuclei.size());
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

/// 1: every nucleus regular and none larger than 2x normal.
/// 3: sizes irregular (area CV above cv3) or any nucleus larger than 3x normal.
/// 2: everything else. Case 1 is tested first.
inline int score_anisonucleosis(std::span<const NucleusFeatures> nuclei, const NormalBaseline& base,
                                const ScoringParams& p = {}) {
    detail::require_population(nuclei);
    const double max_area = std::ranges::max(nuclei, {}, &NucleusFeatures::area).area;
    const bool all_regular =
        std::ranges::none_of(nuclei, [&](const NucleusFeatures& f) { return detail::irregular(f, base, p); });
    if (all_regular && max_area <= 2.0 * base.normal_area) return 1;
    if (area_cv(nuclei) > p.cv3 || max_area > 3.0 * base.normal_area) return 3;
    return 2;
}

inline CriterionScores score_criteria(std::span<const NucleusFeatures> nuclei, const NormalBaseline& base,
                                      const ScoringParams& p = {}) {
    return {score_anisonucleosis(nuclei, base, p), score_chromatin(nuclei, base, p),
            score_contour(nuclei, base, p), score_nucleoli(nuclei, base, p)};
}

/// Maximum of the four criterion scores.
inline int quarter_score(const CriterionScores& cs) {
    return std::max({cs.anisonucleosis, cs.chromatin, cs.contour, cs.nucleoli});
}

/// 3 if any quarter is 3, else 2 if any is 2, else 1.
inline int slide_score(std::span<const int> quarters) {
    if (quarters.size() != 4) throw Error(ErrorCode::WrongQuarterCount, "slide score needs exactly 4 quarters");
    for (int q : quarters)
        if (q < 1 || q > 3) throw Error(ErrorCode::OutOfRange, "quarter score must be 1, 2 or 3");
    if (std::ranges::find(quarters, 3) != quarters.end()) return 3;
    if (std::ranges::find(quarters, 2) != quarters.end()) return 2;
    return 1;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct EvalCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

/// (tp + tn) / (tp + tn + fp + fn).
inline double accuracy(const EvalCounts& c) {
    const std::size_t total = c.tp + c.tn + c.fp + c.fn;
    if (total == 0) throw Error(ErrorCode::EmptyCounts, "accuracy of zero counts");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

struct PrecisionRecall {
    double precision = 0.0;
    /// tp / (tp + fn).
    double recall = 0.0;
    double f_measure = 0.0;
    /// false when precision + recall == 0; f_measure is then reported as 0.
    bool f_defined = true;
};

inline PrecisionRecall precision_recall_f(const EvalCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) {
        throw Error(ErrorCode::UndefinedMetric, "precision or recall denominator is zero");
    }
    PrecisionRecall r;
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (r.precision + r.recall == 0.0) {
        r.f_defined = false;
        r.f_measure = 0.0;
    } else {
        r.f_measure = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    return r;
}

/// cells[truth - 1][predicted - 1].
struct ConfusionMatrix {
    std::array<std::array<std::size_t, 3>, 3> cells{};

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : cells)
            for (auto v : row) t += v;
        return t;
    }
    std::size_t correct() const { return cells[0][0] + cells[1][1] + cells[2][2]; }
    std::size_t truth_count(int cls) const {
        const auto& row = cells[static_cast<std::size_t>(cls - 1)];
        return row[0] + row[1] + row[2];
    }

    /// Fraction on the diagonal.
    double accuracy() const {
        if (total() == 0) throw Error(ErrorCode::EmptyCounts, "empty confusion matrix");
        return static_cast<double>(correct()) / static_cast<double>(total());
    }

    /// Correct predictions among items whose truth is `cls`.
    double class_accuracy(int cls) const {
        const std::size_t n = truth_count(cls);
        if (n == 0) throw Error(ErrorCode::EmptyCounts, "class has no ground-truth items");
        return static_cast<double>(cells[static_cast<std::size_t>(cls - 1)][static_cast<std::size_t>(cls - 1)]) /
               static_cast<double>(n);
    }

    /// Binarized counts treating `cls` as the positive class.
    EvalCounts one_vs_rest(int cls) const {
        const auto k = static_cast<std::size_t>(cls - 1);
        EvalCounts c;
        for (std::size_t t = 0; t < 3; ++t) {
            for (std::size_t p = 0; p < 3; ++p) {
                const auto v = cells[t][p];
                if (t == k && p == k) c.tp += v;
                else if (t == k) c.fn += v;
                else if (p == k) c.fp += v;
                else c.tn += v;
            }
        }
        return c;
    }
};

inline ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 1 || predicted[i] > 3 || truth[i] < 1 || truth[i] > 3) {
            throw Error(ErrorCode::OutOfRange, "scores must be 1, 2 or 3");
        }
        ++m.cells[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(predicted[i] - 1)];
    }
    return m;
}

namespace detail {

inline double median(std::vector<double> v) {
    std::ranges::sort(v);
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Per-feature medians of annotated healthy nuclei.
inline NormalBaseline baseline_from_features(std::span<const NucleusFeatures> healthy) {
    if (healthy.empty()) throw Error(ErrorCode::EmptyAnnotation, "no healthy nuclei annotated");
    auto column = [&](auto proj) {
        std::vector<double> v;
        for (const auto& f : healthy) v.push_back(static_cast<double>(proj(f)));
        return detail::median(std::move(v));
    };
    return {column([](const auto& f) { return f.area; }),
            column([](const auto& f) { return f.mean_intensity; }),
            column([](const auto& f) { return f.circularity; }),
            column([](const auto& f) { return f.nucleoli_count; })};
}

}  // namespace nucleograde::scoring

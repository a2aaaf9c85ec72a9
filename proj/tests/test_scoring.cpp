#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "nucleograde/scoring.hpp"

using namespace nucleograde;
using namespace nucleograde::scoring;

namespace {

const NormalBaseline kBase{100.0, 120.0, 14.0, 0.0};

NucleusFeatures nucleus(double area, double intensity = 120.0, double circ = 14.0, int nucleoli = 0) {
    return {area, intensity, circ, nucleoli};
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

ConfusionMatrix contest_matrix() {
    std::vector<int> pred;
    std::vector<int> truth;
    const int cells[3][3] = {{4, 0, 0}, {0, 18, 2}, {0, 1, 9}};
    for (int t = 0; t < 3; ++t)
        for (int p = 0; p < 3; ++p)
            for (int k = 0; k < cells[t][p]; ++k) {
                truth.push_back(t + 1);
                pred.push_back(p + 1);
            }
    return confusion_matrix(pred, truth);
}

}  // namespace

TEST(ScoreFraction, Bands) {
    EXPECT_EQ(score_fraction(0.25), 1);
    EXPECT_EQ(score_fraction(0.45), 2);
    EXPECT_EQ(score_fraction(0.75), 3);
    EXPECT_EQ(score_fraction(0.0), 1);
    EXPECT_EQ(score_fraction(0.30), 1);
    EXPECT_EQ(score_fraction(0.3000001), 2);
    EXPECT_EQ(score_fraction(0.60), 2);
    EXPECT_EQ(score_fraction(0.6000001), 3);
    EXPECT_EQ(score_fraction(1.0), 3);
    EXPECT_EQ(code_of([] { score_fraction(-0.01); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { score_fraction(1.01); }), ErrorCode::OutOfRange);
}

TEST(Chromatin, CountsStrictlyDarkerByMargin) {
    // Threshold is 120 - 10 = 110; 110 itself is not darker.
    std::vector<NucleusFeatures> n = {nucleus(100, 109), nucleus(100, 110), nucleus(100, 130), nucleus(100, 50)};
    EXPECT_EQ(score_chromatin(n, kBase), 2);  // 2 of 4
    n.push_back(nucleus(100, 0));
    EXPECT_EQ(score_chromatin(n, kBase), 2);  // 3 of 5
    n.push_back(nucleus(100, 0));
    EXPECT_EQ(score_chromatin(n, kBase), 3);  // 4 of 6
}

TEST(Contour, RelativeMargin) {
    // Irregular above 14 * 1.15 = 16.1.
    const std::vector<NucleusFeatures> n = {nucleus(100, 120, 16.0), nucleus(100, 120, 16.2), nucleus(100, 120, 30),
                                            nucleus(100, 120, 10)};
    EXPECT_EQ(score_contour(n, kBase), 2);
    ScoringParams p;
    p.contour_margin_ratio = 1.5;
    EXPECT_EQ(score_contour(n, kBase, p), 1);
}

TEST(Nucleoli, FractionWithAnyNucleolus) {
    std::vector<NucleusFeatures> n(10, nucleus(100));
    EXPECT_EQ(score_nucleoli(n, kBase), 1);
    for (int i = 0; i < 7; ++i) n[std::size_t(i)].nucleoli_count = 1 + i % 2;
    EXPECT_EQ(score_nucleoli(n, kBase), 3);
}

TEST(Anisonucleosis, CaseOneTwoThree) {
    EXPECT_EQ(score_anisonucleosis(std::vector{nucleus(150), nucleus(200), nucleus(120)}, kBase), 1);
    // Larger than 2x but uniform and below 3x.
    EXPECT_EQ(score_anisonucleosis(std::vector{nucleus(250), nucleus(260), nucleus(240)}, kBase), 2);
    // Any nucleus beyond 3x.
    EXPECT_EQ(score_anisonucleosis(std::vector{nucleus(250), nucleus(301)}, kBase), 3);
    // Irregular sizes.
    EXPECT_EQ(score_anisonucleosis(std::vector{nucleus(30), nucleus(40), nucleus(250)}, kBase), 3);
    // An irregular contour rules out case 1 even for small nuclei.
    EXPECT_EQ(score_anisonucleosis(std::vector{nucleus(100, 120, 40.0), nucleus(100)}, kBase), 2);
}

TEST(Anisonucleosis, CaseOneIsCheckedFirst) {
    // CV above cv3 but every nucleus regular and at most 2x normal.
    const std::vector<NucleusFeatures> n = {nucleus(5), nucleus(5), nucleus(5), nucleus(200)};
    ASSERT_GT(area_cv(n), 0.5);
    EXPECT_EQ(score_anisonucleosis(n, kBase), 1);
}

TEST(AreaCv, PopulationDeviation) {
    EXPECT_DOUBLE_EQ(area_cv(std::vector{nucleus(10), nucleus(30)}), 0.5);
    EXPECT_DOUBLE_EQ(area_cv(std::vector{nucleus(7)}), 0.0);
}

TEST(Criteria, EmptyPopulationRejected) {
    const std::vector<NucleusFeatures> none;
    EXPECT_EQ(code_of([&] { score_criteria(none, kBase); }), ErrorCode::EmptyPopulation);
    EXPECT_EQ(code_of([&] { score_chromatin(none, kBase); }), ErrorCode::EmptyPopulation);
    EXPECT_EQ(code_of([&] { area_cv(none); }), ErrorCode::EmptyPopulation);
}

TEST(Criteria, QuarterScoreIsMax) {
    EXPECT_EQ(quarter_score({1, 1, 1, 1}), 1);
    EXPECT_EQ(quarter_score({1, 2, 1, 1}), 2);
    EXPECT_EQ(quarter_score({1, 2, 1, 3}), 3);
    const std::vector<NucleusFeatures> n = {nucleus(400, 50, 30, 1), nucleus(80, 50, 30, 1)};
    const auto cs = score_criteria(n, kBase);
    EXPECT_EQ(cs, (CriterionScores{3, 3, 3, 3}));
}

TEST(SlideScore, AllCombinationsFollowMaxRule) {
    int seen = 0;
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b)
            for (int c = 1; c <= 3; ++c)
                for (int d = 1; d <= 3; ++d) {
                    const std::vector q = {a, b, c, d};
                    EXPECT_EQ(slide_score(q), std::max({a, b, c, d}));
                    ++seen;
                }
    EXPECT_EQ(seen, 81);
}

TEST(SlideScore, Errors) {
    EXPECT_EQ(code_of([] { slide_score(std::vector{1, 2, 3}); }), ErrorCode::WrongQuarterCount);
    EXPECT_EQ(code_of([] { slide_score(std::vector{1, 2, 3, 0}); }), ErrorCode::OutOfRange);
    EXPECT_EQ(code_of([] { slide_score(std::vector{1, 4, 1, 1}); }), ErrorCode::OutOfRange);
}

TEST(Metrics, PrecisionRecallF) {
    const auto r = precision_recall_f({8, 2, 0, 4});
    EXPECT_NEAR(r.precision, 0.8, 1e-12);
    EXPECT_NEAR(r.recall, 8.0 / 12.0, 1e-12);
    EXPECT_NEAR(r.f_measure, 0.7273, 1e-4);
    EXPECT_TRUE(r.f_defined);
    const auto z = precision_recall_f({0, 3, 0, 2});
    EXPECT_FALSE(z.f_defined);
    EXPECT_EQ(z.f_measure, 0.0);
    EXPECT_EQ(code_of([] { precision_recall_f({0, 0, 5, 3}); }), ErrorCode::UndefinedMetric);
    EXPECT_EQ(code_of([] { precision_recall_f({0, 3, 5, 0}); }), ErrorCode::UndefinedMetric);
}

TEST(Metrics, Accuracy) {
    EXPECT_DOUBLE_EQ(accuracy({3, 1, 4, 2}), 0.7);
    EXPECT_EQ(code_of([] { accuracy({}); }), ErrorCode::EmptyCounts);
}

TEST(Confusion, ThirtyFourSlideFixture) {
    const auto m = contest_matrix();
    EXPECT_EQ(m.total(), 34u);
    EXPECT_EQ(m.correct(), 31u);
    EXPECT_DOUBLE_EQ(m.accuracy(), 31.0 / 34.0);
    EXPECT_NEAR(m.accuracy(), 0.9118, 1e-4);
    EXPECT_DOUBLE_EQ(m.class_accuracy(1), 1.0);
    EXPECT_DOUBLE_EQ(m.class_accuracy(2), 18.0 / 20.0);
    EXPECT_DOUBLE_EQ(m.class_accuracy(3), 9.0 / 10.0);
    const auto c2 = m.one_vs_rest(2);
    EXPECT_EQ(c2.tp, 18u);
    EXPECT_EQ(c2.fn, 2u);
    EXPECT_EQ(c2.fp, 1u);
    EXPECT_EQ(c2.tn, 13u);
    EXPECT_DOUBLE_EQ(accuracy(c2), 31.0 / 34.0);
    for (int cls = 1; cls <= 3; ++cls) {
        const auto c = m.one_vs_rest(cls);
        EXPECT_EQ(c.tp + c.fp + c.fn + c.tn, 34u);
    }
}

TEST(Confusion, Errors) {
    EXPECT_EQ(code_of([] { confusion_matrix(std::vector{1, 2}, std::vector{1}); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([] { confusion_matrix(std::vector{0}, std::vector{1}); }), ErrorCode::OutOfRange);
    const ConfusionMatrix empty;
    EXPECT_EQ(code_of([&] { empty.accuracy(); }), ErrorCode::EmptyCounts);
    EXPECT_EQ(code_of([&] { contest_matrix().class_accuracy(1); }), ErrorCode::IoError);  // no throw
    EXPECT_EQ(code_of([&] { confusion_matrix(std::vector{2}, std::vector{2}).class_accuracy(1); }),
              ErrorCode::EmptyCounts);
}

TEST(Baseline, MediansPerFeature) {
    const std::vector<NucleusFeatures> h = {nucleus(50, 100, 13, 0), nucleus(70, 90, 15, 1), nucleus(60, 120, 14, 0),
                                            nucleus(80, 110, 12, 2)};
    const auto b = baseline_from_features(h);
    EXPECT_DOUBLE_EQ(b.normal_area, 65.0);
    EXPECT_DOUBLE_EQ(b.normal_mean_intensity, 105.0);
    EXPECT_DOUBLE_EQ(b.normal_circularity, 13.5);
    EXPECT_DOUBLE_EQ(b.normal_nucleoli, 0.5);
    EXPECT_EQ(code_of([] { baseline_from_features(std::vector<NucleusFeatures>{}); }), ErrorCode::EmptyAnnotation);
    EXPECT_THROW((NormalBaseline{0.0, 1.0, 1.0, 0.0}.validate()), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "synap/common.hpp"
#include "synap/metrics.hpp"

using namespace synap;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntegralImage flat_integral(double x, double y, int width = 64) {
    IntegralImage img;
    img.width = width;
    img.fov = 43.10;
    img.center_pose = {{x, y, 35.0}, 0};
    img.pixels.assign(static_cast<std::size_t>(width) * width, 0.1);
    img.count.assign(img.pixels.size(), 1);
    return img;
}

using V = std::vector<double>;

}  // namespace

TEST(Metrics, SeparationRatio) {
    EXPECT_DOUBLE_EQ(separation_ratio(V{0.8, 0.6}, V{0.3, 0.2}), 2.0);
    EXPECT_DOUBLE_EQ(separation_ratio(V{0.3}, V{0.6}), 0.5);
    EXPECT_EQ(separation_ratio(V{0.3}, V{}), kInf);
    EXPECT_EQ(separation_ratio(V{}, V{0.3}), 0.0);
    EXPECT_EQ(separation_ratio(V{}, V{}), 0.0);
    EXPECT_EQ(separation_ratio(V{0.2}, V{0.0}), kInf);
    EXPECT_EQ(separation_ratio(V{0.0}, V{0.0}), 1.0);
}

TEST(MetricsProperty, RatioNonNegativeAndCurveMonotone) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(2, 30);
    for (int i = 0; i < 2000; ++i) {
        V a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        EXPECT_GE(separation_ratio(a, b), 0.0);
        const auto c = score_curve(a);
        double gap = 0;
        for (std::size_t k = 1; k < c.sorted.size(); ++k) {
            EXPECT_LE(c.sorted[k - 1], c.sorted[k]);
            gap = std::max(gap, c.sorted[k] - c.sorted[k - 1]);
        }
        EXPECT_EQ(c.max_gradient, gap);
    }
    EXPECT_THROW(score_curve(V{0.5}), DomainError);
}

TEST(Metrics, PrecisionRecallSweep) {
    const std::vector<Person> persons{{0, 0, 0.5, 1.0}, {10, 0, 0.5, 1.0}};
    const std::vector<LabeledScore> scores{{0.9, true, 0.2, 0}, {0.4, false, 5, 5}, {0.6, true, 10.5, 0}};
    const auto r = evaluate_scores("max_median", scores, persons, 1.5);
    EXPECT_EQ(r.method, "max_median");
    EXPECT_DOUBLE_EQ(r.ratio, 0.6 / 0.4);
    EXPECT_EQ(r.true_count, 2u);
    EXPECT_EQ(r.false_count, 1u);
    EXPECT_DOUBLE_EQ(r.min_true, 0.6);
    EXPECT_DOUBLE_EQ(r.max_false, 0.4);
    EXPECT_EQ(r.curve, (V{0.4, 0.6, 0.9}));
    EXPECT_NEAR(r.max_gradient, 0.3, 1e-12);
    ASSERT_EQ(r.pr.size(), 19u);
    auto at = [&](double tau) {
        for (const auto& p : r.pr)
            if (std::abs(p.threshold - tau) < 1e-9) return p;
        ADD_FAILURE() << tau;
        return PrPoint{};
    };
    EXPECT_NEAR(at(0.3).precision, 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(at(0.3).recall, 1.0);
    EXPECT_DOUBLE_EQ(at(0.5).precision, 1.0);
    EXPECT_DOUBLE_EQ(at(0.5).recall, 1.0);
    EXPECT_DOUBLE_EQ(at(0.7).recall, 0.5);
    EXPECT_DOUBLE_EQ(at(0.95).precision, 1.0);
    EXPECT_DOUBLE_EQ(at(0.95).recall, 0.0);
}

TEST(Metrics, NoPersonsMeansNoTruePositives) {
    const std::vector<LabeledScore> scores{{0.9, false, 0, 0}, {0.4, false, 5, 5}};
    const auto r = evaluate_scores("single", scores, {}, 1.5);
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_EQ(r.true_count, 0u);
    for (const auto& p : r.pr) EXPECT_EQ(p.recall, 1.0);
}

TEST(Metrics, PersonBoxAndAppearances) {
    const Dem dem = Dem::flat(-30, -30, 0.25, 241, 241);
    const IntegralImage img = flat_integral(0, 0);
    const Person centre{0.0, 0.0, 0.5, 1.0};
    const Person away{100.0, 0.0, 0.5, 1.0};
    const auto box = person_box(centre, img, dem);
    ASSERT_TRUE(box);
    // Ground sample distance is c_f / 64 = 0.43 m, so a 1 m disk spans 2-4 px.
    EXPECT_GE(box->width(), 2);
    EXPECT_LE(box->width(), 4);
    EXPECT_TRUE(box->contains(32, 32) || box->contains(31, 31));
    EXPECT_FALSE(person_box(away, img, dem));

    const std::vector<IntegralImage> integrals{img, img, flat_integral(5, 0)};
    const std::vector<std::vector<Detection>> dets{{{*box, 0.9, 4}}, {}, {{{0, 0, 3, 3}, 0.9, 16}}};
    const std::vector<Person> persons{centre, away};
    EXPECT_EQ(count_appearances(persons, integrals, dets, dem), (std::vector<int>{1, 0}));
}

TEST(Metrics, SingleDetectionsLabelledByGroundPosition) {
    const Dem dem = Dem::flat(-30, -30, 0.25, 241, 241);
    const std::vector<IntegralImage> integrals{flat_integral(0, 0)};
    const std::vector<std::vector<Detection>> dets{{{{31, 31, 32, 32}, 0.7, 4}, {{0, 0, 3, 3}, 0.2, 16}}};
    const std::vector<Person> persons{{0.3, 0.0, 0.5, 1.0}};
    const auto labelled = single_detections(integrals, dets, dem, persons, 1.5);
    ASSERT_EQ(labelled.size(), 2u);
    EXPECT_TRUE(labelled[0].truth);
    EXPECT_NEAR(labelled[0].x, 0.0, 1e-9);
    EXPECT_NEAR(labelled[0].y, 0.0, 1e-9);
    EXPECT_FALSE(labelled[1].truth);
    EXPECT_DOUBLE_EQ(labelled[1].score, 0.2);
}

TEST(Metrics, FusedRegionsScoreTheirPeak) {
    const Dem dem = Dem::flat(-30, -30, 0.25, 241, 241);
    ConfidenceMap map({-30, -30, 30, 30}, 0.25, 1.0);
    const IntegralImage img = flat_integral(0, 0);
    // A strong box at the centre nested in a weaker one, plus a far box.
    const std::vector<Detection> dets{{{30, 30, 33, 33}, 0.9, 16}, {{28, 28, 35, 35}, 0.5, 64}, {{2, 2, 4, 4}, 0.3, 9}};
    map.project_detections(dets, img, dem, 0);
    map.finalize(0, 0.5, true);
    const std::vector<Person> persons{{0, 0, 0.5, 1.0}};
    auto regions = fused_detections(map, Method::maximum, persons, 1.5);
    ASSERT_EQ(regions.size(), 2u);
    std::sort(regions.begin(), regions.end(), [](auto& a, auto& b) { return a.score > b.score; });
    EXPECT_DOUBLE_EQ(regions[0].score, 0.9);
    EXPECT_TRUE(regions[0].truth);
    EXPECT_DOUBLE_EQ(regions[1].score, 0.3);
    EXPECT_FALSE(regions[1].truth);
}

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "synap/detect.hpp"
#include "synap/fusion.hpp"
#include "synap/integral.hpp"
#include "synap/scene.hpp"

namespace synap {

/// min(true) / max(false); +inf without false scores, 0 without true ones.
double separation_ratio(std::span<const double> true_scores, std::span<const double> false_scores);

struct ScoreCurve {
    std::vector<double> sorted;  // ascending
    double max_gradient = 0;     // largest step between neighbours
};
/// Needs at least two scores.
ScoreCurve score_curve(std::span<const double> scores);

struct LabeledScore {
    double score = 0;
    bool truth = false;
    double x = 0, y = 0;  // ground position
};

/// Connected regions (8-neighbourhood) of finalized, non-partial cells with
/// a positive combined value. Each region scores its peak and is true when
/// the peak cell lies within r_match of a person.
std::vector<LabeledScore> fused_detections(const ConfidenceMap& map, Method method,
                                           std::span<const Person> persons, double r_match);

/// Every detection of every integral, labelled by whether the ground point
/// under its box centre lies within r_match of a person.
std::vector<LabeledScore> single_detections(std::span<const IntegralImage> integrals,
                                            std::span<const std::vector<Detection>> detections,
                                            const Dem& dem, std::span<const Person> persons, double r_match);

/// Pixel box of a person's ground disk in an integral, or nullopt when the
/// person's centre is outside the integral's valid footprint.
std::optional<Aabb> person_box(const Person& person, const IntegralImage& integral, const Dem& dem);

/// Per person, the number of integrals whose footprint holds the person and
/// in which some detection box overlaps the person's box.
std::vector<int> count_appearances(std::span<const Person> persons, std::span<const IntegralImage> integrals,
                                   std::span<const std::vector<Detection>> detections, const Dem& dem);

struct PrPoint {
    double threshold = 0;
    double precision = 0;
    double recall = 0;
};

struct MethodReport {
    std::string method;  // "single", "maximum", "median", "max_median"
    double ratio = 0;
    double min_true = 0, max_false = 0;
    std::size_t true_count = 0, false_count = 0;
    double max_gradient = 0;
    std::vector<double> curve;
    std::vector<PrPoint> pr;
};

struct EvalReport {
    std::array<MethodReport, 4> methods;  // single, maximum, median, max_median
    std::vector<int> appearances;
    std::size_t persons = 0;
    std::size_t clipped = 0;

    const MethodReport& single() const { return methods[0]; }
    const MethodReport& of(Method m) const { return methods[1 + static_cast<std::size_t>(m)]; }
};

/// Ratio, curve and precision/recall sweep for labelled scores. Recall
/// counts persons matched by at least one true score at or above threshold.
MethodReport evaluate_scores(const std::string& name, std::span<const LabeledScore> scores,
                             std::span<const Person> persons, double r_match);

}  // namespace synap

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synap/detect.hpp"
#include "synap/fusion.hpp"
#include "synap/integral.hpp"
#include "synap/metrics.hpp"
#include "synap/occlusion.hpp"
#include "synap/sampling.hpp"
#include "synap/scene.hpp"

namespace synap {

struct FusionConfig {
    double cell_size = 0.25;  // m
    double r_match = 1.5;     // m
    double threshold = 0.5;   // decision threshold on combined values
};

/// Everything one simulated scan needs. The scan flies along +x at y = 0
/// over [0, path_length]; the scene extends c_f/2 + margin past the path.
struct ScenarioConfig {
    std::string name = "open_field";
    FlightParams flight;
    OcclusionParams occlusion;  // d = 0: open field
    IntensityModel intensity;
    double dem_spacing = 0.25;
    double path_length = 80.0;
    double margin = 2.0;
    int persons = 3;
    double person_radius = 0.5;
    double person_spacing = 5.0;  // minimum distance between persons, m
    int resolution = 128;
    double gps_rate = 5.0;
    double sensor_noise = 0.0;
    DetectorConfig detector;
    FusionConfig fusion;

    void validate() const;
};

ScenarioConfig open_field_preset();
/// Forest with integrated density close to 0.9 and sun-warmed crowns.
ScenarioConfig dense_forest_preset();
/// Looks up a preset by name ("open_field" or "dense_forest").
ScenarioConfig preset(const std::string& name);

Extent scenario_extent(const ScenarioConfig& config);
FlightPath scenario_path(const ScenarioConfig& config);
/// Persons are placed where every integral that can see them exists:
/// x in [c_f + 1, L - c_f - 1], |y| <= c_f/2 - 3.
Extent person_region(const ScenarioConfig& config);

/// Forest plus persons for one seed.
Scene build_scene(const ScenarioConfig& config, std::uint64_t seed);

/// Flies the scan, rendering only frames that some window uses.
std::vector<Frame> simulate_frames(const Scene& scene, const ScenarioConfig& config, std::uint64_t seed);

/// Sliding-window integrals rounded to the 16-bit grid used on disk, so
/// stage files reproduce in-process results exactly.
std::vector<IntegralImage> compute_integrals(std::span<const Frame> frames, const Dem& dem,
                                             const ScenarioConfig& config, bool deferred = true);

struct FusionResult {
    ConfidenceMap map;
    std::vector<std::vector<Detection>> detections;  // per integral
    std::vector<std::pair<int, CellDecision>> decisions;  // (integral index at finalization, decision)
    EvalReport report;
};

/// Detects, fuses in stream order with delayed finalization, and evaluates.
FusionResult fuse_and_evaluate(std::span<const IntegralImage> integrals, const Dem& dem,
                               std::span<const Person> persons, const ScenarioConfig& config);

struct RunResult {
    Scene scene;
    std::vector<Frame> frames;
    std::vector<IntegralImage> integrals;
    FusionResult fusion;
};

RunResult run_end_to_end(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace synap

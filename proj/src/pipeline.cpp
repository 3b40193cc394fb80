#include "synap/pipeline.hpp"

#include <cmath>
#include <random>

#include "synap/common.hpp"

namespace synap {

void ScenarioConfig::validate() const {
    flight.validate();
    occlusion.validate();
    if (!(dem_spacing > 0.0)) throw DomainError("dem_spacing must be positive");
    if (!(path_length >= 0.0)) throw DomainError("path_length must be non-negative");
    if (!(margin >= 0.0)) throw DomainError("margin must be non-negative");
    if (persons < 0) throw DomainError("persons must be non-negative");
    if (!(person_radius > 0.0)) throw DomainError("person_radius must be positive");
    if (!(person_spacing >= 0.0)) throw DomainError("person_spacing must be non-negative");
    if (resolution < 8) throw DomainError("resolution must be at least 8 pixels");
    if (!(gps_rate > 0.0)) throw DomainError("gps_rate must be positive");
    if (!(sensor_noise >= 0.0)) throw DomainError("sensor_noise must be non-negative");
    if (!(fusion.cell_size > 0.0)) throw DomainError("cell_size must be positive");
    if (!(fusion.r_match > 0.0)) throw DomainError("r_match must be positive");
    if (!(fusion.threshold >= 0.0 && fusion.threshold <= 1.0)) throw DomainError("fusion threshold must be in [0, 1]");
}

ScenarioConfig open_field_preset() { return ScenarioConfig{}; }

ScenarioConfig dense_forest_preset() {
    ScenarioConfig c;
    c.name = "dense_forest";
    // 1 - (1 - 0.0376)^60 = 0.8997
    c.occlusion.d = 0.0376;
    c.occlusion.o = 0.5;
    c.occlusion.l = 30.0;
    // Only the top tenth of the canopy is sun-warmed. Those crowns are close
    // to the camera, so which of them line up with a ground point depends on
    // the exact frames a window samples.
    c.intensity.warm_fraction = 0.2;
    c.intensity.warm_low = 0.5;
    c.intensity.warm_high = 0.9;
    c.intensity.warm_min_height = 0.9;
    // Integrals under this canopy sit near 0.15; a person adds about 0.09.
    c.detector.threshold = 0.23;
    c.detector.baseline = 0.15;
    c.detector.person = 0.35;
    // Crown smears along the flight line form long blobs, not persons.
    c.detector.max_area = 80;
    return c;
}

ScenarioConfig preset(const std::string& name) {
    if (name == "open_field") return open_field_preset();
    if (name == "dense_forest") return dense_forest_preset();
    throw DomainError("unknown preset '" + name + "'");
}

Extent scenario_extent(const ScenarioConfig& config) {
    const double half = 0.5 * ground_coverage(config.flight.h, config.flight.fov) + config.margin;
    return {-half, -half, config.path_length + half, half};
}

FlightPath scenario_path(const ScenarioConfig& config) { return {0.0, 0.0, config.path_length, 0.0}; }

Extent person_region(const ScenarioConfig& config) {
    const double c_f = ground_coverage(config.flight.h, config.flight.fov);
    return {c_f + 1.0, -(0.5 * c_f - 3.0), config.path_length - c_f - 1.0, 0.5 * c_f - 3.0};
}

Scene build_scene(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    SceneConfig sc;
    sc.extent = scenario_extent(config);
    sc.occlusion = config.occlusion;
    sc.intensity = config.intensity;
    sc.dem_spacing = config.dem_spacing;
    Scene scene = generate_forest(sc, seed);
    if (config.persons == 0) return scene;

    const Extent region = person_region(config);
    if (!(region.width() >= 0.0 && region.height() >= 0.0)) {
        throw DomainError("path too short for persons away from the scan ends");
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 5u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> ux(region.x0, region.x1);
    std::uniform_real_distribution<double> uy(region.y0, region.y1);
    for (int p = 0; p < config.persons; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const double x = ux(rng);
            const double y = uy(rng);
            bool clear = true;
            for (const auto& q : scene.persons) {
                if (std::hypot(x - q.x, y - q.y) < config.person_spacing) clear = false;
            }
            if (clear) {
                add_person(scene, x, y, config.person_radius);
                scene.persons.back().intensity = config.intensity.person;
                placed = true;
            }
        }
        if (!placed) throw DomainError("cannot place persons with the requested spacing");
    }
    return scene;
}

std::vector<Frame> simulate_frames(const Scene& scene, const ScenarioConfig& config, std::uint64_t seed) {
    const SamplingPlan plan = make_plan(config.flight);
    const FlightPath path = scenario_path(config);
    const std::size_t count = scan_frame_count(config.flight, path);
    std::vector<bool> needed(count, false);
    for (const auto& w : window_schedule(count, config.flight, plan)) {
        for (const std::size_t k : w.frames) needed[k] = true;
    }
    ScanOptions opt;
    opt.resolution = config.resolution;
    opt.gps_rate = config.gps_rate;
    opt.sensor_noise = config.sensor_noise;
    opt.render_filter = [needed](std::size_t k) { return k < needed.size() && needed[k]; };
    return fly_scan(scene, config.flight, path, seed, opt);
}

std::vector<IntegralImage> compute_integrals(std::span<const Frame> frames, const Dem& dem,
                                             const ScenarioConfig& config, bool deferred) {
    auto integrals = sliding_integrals(frames, dem, config.flight, make_plan(config.flight), deferred);
    for (auto& integral : integrals) quantize_integral(integral);
    return integrals;
}

FusionResult fuse_and_evaluate(std::span<const IntegralImage> integrals, const Dem& dem,
                               std::span<const Person> persons, const ScenarioConfig& config) {
    const SamplingPlan plan = make_plan(config.flight);
    const Extent map_extent{dem.x0(), dem.y0(), dem.x1(), dem.y1()};
    FusionResult r{ConfidenceMap(map_extent, config.fusion.cell_size, plan.o_f), {}, {}, {}};
    r.detections.reserve(integrals.size());
    for (const auto& integral : integrals) r.detections.push_back(detect(integral, config.detector));

    std::size_t clipped = 0;
    for (std::size_t k = 0; k < integrals.size(); ++k) {
        const int index = static_cast<int>(k);
        clipped += r.map.project_detections(r.detections[k], integrals[k], dem, index);
        const bool last = k + 1 == integrals.size();
        for (auto& d : r.map.finalize(index, config.fusion.threshold, last)) r.decisions.emplace_back(index, d);
    }

    const double r_match = config.fusion.r_match;
    const auto single = single_detections(integrals, r.detections, dem, persons, r_match);
    r.report.methods[0] = evaluate_scores("single", single, persons, r_match);
    for (const Method m : kMethods) {
        const auto fused = fused_detections(r.map, m, persons, r_match);
        r.report.methods[1 + static_cast<std::size_t>(m)] = evaluate_scores(method_name(m), fused, persons, r_match);
    }
    r.report.appearances = count_appearances(persons, integrals, r.detections, dem);
    r.report.persons = persons.size();
    r.report.clipped = clipped;
    return r;
}

RunResult run_end_to_end(const ScenarioConfig& config, std::uint64_t seed) {
    Scene scene = build_scene(config, seed);
    auto frames = simulate_frames(scene, config, seed);
    auto integrals = compute_integrals(frames, scene.dem, config);
    auto fusion = fuse_and_evaluate(integrals, scene.dem, scene.persons, config);
    return {std::move(scene), std::move(frames), std::move(integrals), std::move(fusion)};
}

}  // namespace synap

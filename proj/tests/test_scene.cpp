#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "synap/common.hpp"
#include "synap/occlusion.hpp"
#include "synap/scene.hpp"

using namespace synap;

namespace {

double distance(Vec3 a, Vec3 b) { return std::sqrt(dot(a - b, a - b)); }

// Person pixels visible with occluders present, over person pixels in the
// same view with the canopy removed.
double visible_person_fraction(const Scene& scene, const Pose& pose, double fov, int resolution) {
    Scene clear = scene;
    clear.occluders = OccluderField{};
    const auto with = render_single_image(scene, pose, fov, resolution);
    const auto without = render_single_image(clear, pose, fov, resolution);
    const std::uint16_t person = quantize16(scene.config.intensity.person);
    std::size_t total = 0, seen = 0;
    for (std::size_t i = 0; i < with.pixels.size(); ++i) {
        if (without.pixels[i] != person) continue;
        ++total;
        if (with.pixels[i] == person) ++seen;
    }
    return total ? static_cast<double>(seen) / static_cast<double>(total) : 0.0;
}

}  // namespace

TEST(Scene, GenerationIsDeterministic) {
    const Extent ext{-20, -20, 20, 20};
    const OcclusionParams occ{0.02, 1.0, 20.0, 0.0};
    const Scene a = generate_forest(ext, occ, 5);
    const Scene b = generate_forest(ext, occ, 5);
    const Scene c = generate_forest(ext, occ, 6);
    EXPECT_EQ(a.occluders.occluders(), b.occluders.occluders());
    EXPECT_EQ(a.dem.cell_intensities(), b.dem.cell_intensities());
    EXPECT_NE(a.occluders.occluders(), c.occluders.occluders());
}

TEST(Scene, OccludersInsideVolumeAndIntensitiesInRange) {
    SceneConfig cfg;
    cfg.extent = {-15, -15, 15, 15};
    cfg.occlusion = {0.05, 1.0, 12.0, 0.0};
    cfg.intensity.warm_fraction = 0.5;
    const Scene s = generate_forest(cfg, 7);
    ASSERT_FALSE(s.occluders.empty());
    for (const auto& o : s.occluders.occluders()) {
        EXPECT_GE(o.center.z - 0.5 * o.diameter, 0.0);
        EXPECT_LE(o.center.z + 0.5 * o.diameter, cfg.occlusion.l);
        EXPECT_GE(o.intensity, 0.0);
        EXPECT_LE(o.intensity, 1.0);
    }
    for (const float v : s.dem.cell_intensities()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
}

TEST(Scene, VerticalBlockFractionMatchesDensity) {
    const OcclusionParams occ{0.02, 1.0, 40.0, 0.0};
    const Scene s = generate_forest(Extent{-40, -40, 40, 40}, occ, 8);
    const double expected = integrated_density(occ).value;
    EXPECT_NEAR(vertical_block_fraction(s, {-30, -30, 30, 30}, 200000, 1), expected, 0.03);
}

TEST(Scene, RejectsBadInput) {
    EXPECT_THROW(generate_forest(Extent{0, 0, 1, 1}, OcclusionParams{0.1, 1.0, 5.0, 0.0}, 1), DomainError);
    Scene s = generate_forest(Extent{0, 0, 10, 10}, OcclusionParams{}, 1);
    EXPECT_THROW(add_person(s, 20, 5), DomainError);
    EXPECT_THROW(add_person(s, 5, 5, 0.0), DomainError);
    EXPECT_THROW(render_single_image(s, Pose{{5, 5, 35}, 0}, 0.0, 16), DomainError);
    EXPECT_THROW(render_single_image(s, Pose{{5, 5, 35}, 0}, 43.1, 0), DomainError);
}

TEST(Scene, FrameSpacingAndCount) {
    FlightParams p;
    p.v_f = 4.0;
    EXPECT_NEAR(p.v_f * p.t_i, 0.133, 5e-4);
    // Frames 0.92 m apart along 27.6 m.
    p.v_f = 0.92 * 30.0;
    EXPECT_EQ(scan_frame_count(p, FlightPath{0, 0, 27.6, 0}), 30u);
    EXPECT_EQ(scan_frame_count(p, FlightPath{3, 3, 3, 3}), 1u);
}

TEST(Scene, FootprintLaw) {
    // A DEM strip W metres wide under the camera; everything beyond it is
    // ambient. The columns that see ground span W at the ground sample distance.
    const double W = 10.0;
    const int res = 256;
    const double fov = 43.10;
    for (const double h : {17.5, 35.0, 70.0}) {
        SceneConfig cfg;
        cfg.extent = {-W / 2, -200, W / 2, 200};
        cfg.intensity.ground_noise = 0.0;
        const Scene s = generate_forest(cfg, 1);
        const auto img = render_single_image(s, Pose{{0, 0, h}, 0}, fov, res);
        int ground_cols = 0;
        for (int c = 0; c < res; ++c) ground_cols += img.at(c, res / 2) == quantize16(0.10) / 65535.0;
        const double footprint = 2.0 * h * std::tan(fov / 2.0 * std::numbers::pi / 180.0);
        EXPECT_NEAR(ground_cols * footprint / res, W, footprint / res) << "h=" << h;
        const PinholeCamera cam({0, 0, h}, fov, res);
        EXPECT_NEAR(cam.footprint_width(h), footprint, 1e-9);
    }
}

TEST(Scene, PoseInterpolationIsLinearInTime) {
    const std::vector<GpsFix> fixes{{0.0, {0, 0, 35}}, {0.2, {2, 1, 35}}, {0.4, {3, 1, 36}}};
    const std::vector<double> times{0.0, 0.05, 0.2, 0.3, 0.4};
    const auto poses = interpolate_poses(fixes, times);
    ASSERT_EQ(poses.size(), times.size());
    EXPECT_EQ(poses[0].position, (Vec3{0, 0, 35}));
    EXPECT_NEAR(poses[1].position.x, 0.5, 1e-12);
    EXPECT_NEAR(poses[1].position.y, 0.25, 1e-12);
    EXPECT_EQ(poses[2].position, (Vec3{2, 1, 35}));
    EXPECT_NEAR(poses[3].position.x, 2.5, 1e-12);
    EXPECT_NEAR(poses[3].position.z, 35.5, 1e-12);
    EXPECT_EQ(poses[4].position, (Vec3{3, 1, 36}));
    EXPECT_EQ(poses[3].timestamp, 0.3);

    const std::vector<double> outside{0.5};
    EXPECT_THROW(interpolate_poses(fixes, outside), DomainError);
    const std::vector<GpsFix> unordered{{0.2, {}}, {0.1, {}}};
    EXPECT_THROW(interpolate_poses(unordered, times), DomainError);
}

TEST(Scene, InterpolationErrorBoundIndependentOfGpsRate) {
    const Scene s = generate_forest(Extent{-20, -20, 60, 20}, OcclusionParams{}, 3);
    FlightParams p;
    p.v_f = 6.0;
    const double bound = interpolation_error(p.v_f, p.t_i);
    std::vector<double> worst;
    for (const double rate : {1.0, 5.0, 30.0}) {
        for (const double delay : {0.0, 0.25 * p.t_i, p.t_i}) {
            ScanOptions opt;
            opt.gps_rate = rate;
            opt.capture_delay = delay;
            opt.delay_compensation = 0.5 * p.t_i;
            opt.render_filter = [](std::size_t) { return false; };
            const auto frames = fly_scan(s, p, FlightPath{0, 0, 40, 0}, 1, opt);
            double err = 0;
            for (std::size_t k = 0; k < frames.size(); ++k) {
                err = std::max(err, distance(frames[k].pose.position, frames[k].true_position));
                if (k > 0) { EXPECT_GT(frames[k].pose.timestamp, frames[k - 1].pose.timestamp); }
            }
            EXPECT_LE(err, bound + 1e-9);
            if (delay == 0.0 || delay == p.t_i) { EXPECT_NEAR(err, bound, 1e-9); }
            worst.push_back(err);
        }
    }
    for (std::size_t i = 3; i < worst.size(); ++i) EXPECT_NEAR(worst[i], worst[i % 3], 1e-9);
}

TEST(Scene, ScanIsDeterministicAndFiltered) {
    SceneConfig cfg;
    cfg.extent = {-16, -16, 26, 16};
    cfg.occlusion = {0.02, 1.0, 20.0, 0.0};
    Scene s = generate_forest(cfg, 4);
    add_person(s, 5, 2);
    FlightParams p;
    ScanOptions opt;
    opt.resolution = 32;
    opt.sensor_noise = 0.01;
    opt.render_filter = [](std::size_t k) { return k % 5 == 0; };
    const auto a = fly_scan(s, p, FlightPath{0, 0, 10, 0}, 2, opt);
    const auto b = fly_scan(s, p, FlightPath{0, 0, 10, 0}, 2, opt);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].rendered, k % 5 == 0);
        EXPECT_EQ(a[k].image.pixels, b[k].image.pixels);
        EXPECT_EQ(a[k].pose, b[k].pose);
        EXPECT_EQ(a[k].image.pixels.empty(), !a[k].rendered);
    }
    EXPECT_THROW(fly_scan(s, p, FlightPath{0, 0, 100, 0}, 2, opt), DomainError);
}

TEST(SceneProperty, NadirVisibilityCensus) {
    // 25 persons near nadir, 30 seeds.
    const OcclusionParams occ{0.02, 1.0, 20.0, 0.0};
    const double expected = 1.0 - integrated_density(occ).value;
    double sum = 0;
    const int seeds = 30;
    for (int seed = 0; seed < seeds; ++seed) {
        SceneConfig cfg;
        cfg.extent = {-25, -25, 25, 25};
        cfg.occlusion = occ;
        Scene s = generate_forest(cfg, 100 + seed);
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) add_person(s, 2.5 * i, 2.5 * j, 0.5);
        sum += visible_person_fraction(s, Pose{{0, 0, 35}, 0}, 43.10, 256);
    }
    EXPECT_NEAR(sum / seeds, expected, 0.03);
}

TEST(SceneProperty, TiltedVisibilityCensus) {
    // A ring of persons 45 degrees off nadir.
    const OcclusionParams occ{0.02, 1.0, 20.0, 0.0};
    const double expected = 1.0 - oblique_density_direct({occ.d, occ.o, occ.l, 45.0}).value;
    double sum = 0;
    const int seeds = 30;
    for (int seed = 0; seed < seeds; ++seed) {
        SceneConfig cfg;
        cfg.extent = {-45, -45, 45, 45};
        cfg.occlusion = occ;
        Scene s = generate_forest(cfg, 200 + seed);
        for (int k = 0; k < 16; ++k) {
            const double a = 2.0 * std::numbers::pi * k / 16.0;
            add_person(s, 35.0 * std::cos(a), 35.0 * std::sin(a), 1.0);
        }
        sum += visible_person_fraction(s, Pose{{0, 0, 35}, 0}, 110.0, 384);
    }
    EXPECT_NEAR(sum / seeds, expected, 0.03);
}

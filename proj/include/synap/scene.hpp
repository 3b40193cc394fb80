#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "synap/dem.hpp"
#include "synap/geometry.hpp"
#include "synap/occlusion.hpp"
#include "synap/sampling.hpp"

namespace synap {

struct Extent {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

/// Thermal intensity model, all values in [0, 1].
struct IntensityModel {
    double ground = 0.10;
    double ground_noise = 0.02;  // uniform +- per DEM cell
    double occluder = 0.15;
    double ambient = 0.15;       // rays leaving the scene
    double person = 1.0;
    // Sun-warmed crowns: this fraction of occluders whose centre lies above
    // warm_min_height * l gets an intensity drawn from [warm_low, warm_high].
    double warm_fraction = 0.0;
    double warm_low = 0.5;
    double warm_high = 0.8;
    double warm_min_height = 0.5;
};

/// Spherical occluder: isotropic, so its silhouette has diameter `diameter`
/// from every viewing direction.
struct Occluder {
    Vec3 center;
    double diameter = 0;
    double intensity = 0;

    friend bool operator==(const Occluder&, const Occluder&) = default;
};

struct Person {
    double x = 0, y = 0;
    double radius = 0.5;
    double intensity = 1.0;
};

struct SceneConfig {
    Extent extent{0, 0, 100, 40};
    OcclusionParams occlusion;
    IntensityModel intensity;
    double dem_spacing = 0.25;
};

/// Occluders plus a uniform xy grid for ray queries.
class OccluderField {
public:
    OccluderField() = default;
    OccluderField(std::vector<Occluder> occluders, Extent extent);

    const std::vector<Occluder>& occluders() const { return occluders_; }
    bool empty() const { return occluders_.empty(); }

    struct Hit {
        double t;
        std::size_t index;
    };
    /// Nearest occluder hit with 0 < t < t_max.
    std::optional<Hit> first_hit(Vec3 origin, Vec3 dir, double t_max) const;

private:
    std::vector<Occluder> occluders_;
    Extent extent_{};
    double cell_ = 1.0;
    int cols_ = 0, rows_ = 0;
    double z_top_ = 0, z_bottom_ = 0;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

struct Scene {
    SceneConfig config;
    Dem dem;
    OccluderField occluders;
    std::vector<Person> persons;

    /// Person whose footprint contains ground point (x, y), if any.
    const Person* person_at(double x, double y) const;
};

/// Procedural forest on a flat DEM. Deterministic for a given seed.
Scene generate_forest(const SceneConfig& config, std::uint64_t seed);
Scene generate_forest(Extent extent, const OcclusionParams& occlusion, std::uint64_t seed);

/// Places a person on the ground; throws if the point is outside the DEM.
void add_person(Scene& scene, double x, double y, double radius = 0.5);

/// Fraction of vertical rays from above the canopy that hit an occluder,
/// sampled uniformly over `region`.
double vertical_block_fraction(const Scene& scene, Extent region, std::size_t rays,
                               std::uint64_t seed);

struct GpsFix {
    double timestamp = 0;
    Vec3 position;
};

/// Time-based linear interpolation between bracketing fixes. No extrapolation.
std::vector<Pose> interpolate_poses(std::span<const GpsFix> fixes, std::span<const double> frame_times);

struct SingleImage {
    int width = 0;
    std::vector<std::uint16_t> pixels;  // row-major, intensity * 65535
    Pose pose;
    std::size_t out_of_extent = 0;      // pixels whose ray left the scene

    double at(int col, int row) const {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)] / 65535.0;
    }
};

std::uint16_t quantize16(double intensity);

SingleImage render_single_image(const Scene& scene, const Pose& pose, double fov_deg,
                                int resolution = 512);

struct FlightPath {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double length() const;
};

struct ScanOptions {
    int resolution = 512;
    double gps_rate = 5.0;            // Hz
    double capture_delay = 0.0;       // true capture precedes its timestamp by this, s
    double delay_compensation = 0.0;  // subtracted from timestamps before interpolation, s
    double sensor_noise = 0.0;        // sd of additive per-pixel noise
    /// Frames for which this returns false get a pose but no pixels.
    std::function<bool(std::size_t)> render_filter;
};

struct Frame {
    SingleImage image;  // pixels empty when not rendered
    Pose pose;          // interpolated from GPS fixes
    Vec3 true_position;
    bool rendered = false;
};

/// Number of frames a scan of `path` yields at spacing v_f * t_i.
std::size_t scan_frame_count(const FlightParams& params, const FlightPath& path);

/// Constant-speed flight along `path` at altitude h; frames every v_f * t_i.
std::vector<Frame> fly_scan(const Scene& scene, const FlightParams& params, const FlightPath& path,
                            std::uint64_t seed, const ScanOptions& options = {});

}  // namespace synap

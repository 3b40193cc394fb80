#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "synap/dem.hpp"
#include "synap/geometry.hpp"
#include "synap/sampling.hpp"
#include "synap/scene.hpp"

namespace synap {

/// World position of the DEM surface seen through each pixel of a camera.
/// Pixels that see no surface hold NaN.
struct GeometryBuffer {
    int width = 0;
    double fov = 0;
    Pose center_pose;
    std::uint64_t dem_revision = 0;
    std::vector<double> x, y, z;

    bool valid_for(const Dem& dem, const Pose& center, double fov_deg, int w) const {
        return width == w && fov == fov_deg && center_pose.position == center.position &&
               dem_revision == dem.revision();
    }
};

/// Rasterizes the DEM mesh from `center` (nadir, `fov_deg`, `width` pixels).
/// This is the geometry pass: it touches every vertex and triangle.
GeometryBuffer build_geometry(const Dem& dem, const Pose& center, double fov_deg, int width);
/// Same pass, reusing the storage of `out`.
void build_geometry(const Dem& dem, const Pose& center, double fov_deg, int width, GeometryBuffer& out);

struct IntegralImage {
    int width = 0;
    double fov = 0;
    Pose center_pose;
    std::vector<double> pixels;         // mean intensity; NaN where count == 0
    std::vector<std::uint32_t> count;   // contributing single images per pixel
    std::vector<std::size_t> frames;    // indices of the integrated frames
    std::size_t excluded = 0;           // frames whose footprint missed the DEM

    bool valid(int col, int row) const { return count[index(col, row)] > 0; }
    double at(int col, int row) const { return pixels[index(col, row)]; }
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(col);
    }
};

/// Rounds every valid pixel to the 16-bit grid used on disk.
void quantize_integral(IntegralImage& integral);

/// Classical rendering: the full geometry pass is repeated for every
/// projected frame. Frames must be rendered (non-empty pixels).
IntegralImage integrate_classical(std::span<const SingleImage* const> frames, const Dem& dem,
                                  const Pose& center, double fov_deg);

/// Reusable geometry for deferred rendering. `passes` counts geometry passes.
struct GeometryCache {
    std::optional<GeometryBuffer> buffer;
    std::size_t passes = 0;
};

/// Deferred rendering: one geometry pass (skipped when the cache is still
/// valid for this DEM revision and centre pose), then per-frame shading.
/// Output is identical to integrate_classical.
IntegralImage integrate_deferred(std::span<const SingleImage* const> frames, const Dem& dem,
                                 const Pose& center, double fov_deg, GeometryCache& cache);

/// Frames of one sliding-window integral.
struct Window {
    std::vector<std::size_t> frames;
};

/// Windows over a video stream with frame spacing v_f * t_i: each window
/// takes plan.n frames, the k-th being the frame nearest to k * d_i past the
/// window start, and windows start every round(d_f / (v_f t_i)) frames.
/// Only full windows are produced.
std::vector<Window> window_schedule(std::size_t frame_count, const FlightParams& params,
                                    const SamplingPlan& plan);

/// Mean position and timestamp of the window's frame poses.
Pose center_pose(std::span<const Frame> frames, const Window& window);

/// Integrals for every window of the stream, in window order.
std::vector<IntegralImage> sliding_integrals(std::span<const Frame> frames, const Dem& dem,
                                             const FlightParams& params, const SamplingPlan& plan,
                                             bool deferred = true);

}  // namespace synap

#pragma once

#include <cstdint>

// Statistical occlusion through a volume of randomly placed occluders.
//
// D-bar is the probability that a nadir ray through a volume of height l,
// filled with occluders of size o at per-layer density d, is blocked.
// D-bar_alpha is the same probability for a ray tilted alpha from nadir.

namespace synap {

struct OcclusionParams {
    double d = 0.0;      // per-layer occluder density in [0, 1)
    double o = 1.0;      // occluder size, m
    double l = 0.0;      // occlusion volume height, m
    double alpha = 0.0;  // viewing angle from nadir, degrees in [0, 90)

    void validate() const;
    double layers() const { return l / o; }
};

/// Occlusion probability; strong type so it cannot be confused with d.
struct IntegratedDensity {
    double value = 0.0;
};

/// 1 - (1 - d)^(l/o). Ignores alpha.
IntegratedDensity integrated_density(const OcclusionParams& params);

/// 1 - (1 - d_bar)^(1/cos alpha). d_bar == 1 stays 1.
IntegratedDensity oblique_density(IntegratedDensity d_bar, double alpha_deg);

/// 1 - (1 - d)^(l / (cos(alpha) o)).
IntegratedDensity oblique_density_direct(const OcclusionParams& params);

struct OracleResult {
    double fraction = 0.0;       // blocked rays / rays
    std::uint64_t blocked = 0;
    std::uint64_t rays = 0;
    double standard_error = 0.0; // binomial estimate
};

/// Monte-Carlo ray casting through freshly generated occluder volumes.
///
/// Occluders are spheres of diameter o with Poisson-distributed centres in
/// a periodic tile; their density makes a vertical path of length o blocked
/// with probability d. Rays are straight lines tilted alpha from nadir with
/// a random azimuth. Rays are split into fixed chunks, each with its own
/// volume and RNG stream, so the result depends only on (seed, rays).
OracleResult mc_occlusion_oracle(std::uint64_t seed, const OcclusionParams& params,
                                 std::uint64_t rays);

}  // namespace synap

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "synap/dem.hpp"

namespace synap {

struct BenchConfig {
    std::vector<int> n_values{30};
    std::vector<std::size_t> vertex_counts{34'000, 2'600'000};
    int repetitions = 100;
    int warmups = 3;
    int resolution = 800;  // px; small images let per-frame geometry dominate deferred timings too
    double dem_spacing = 0.14;  // m; larger vertex counts extend the DEM past the view
    double h = 35.0;
    double fov = 43.10;
    std::uint64_t seed = 1;
};

struct BenchRow {
    std::string renderer;  // "classical" or "deferred"
    int n = 0;
    std::size_t vertices = 0;
    double mean_ms = 0;
    double std_ms = 0;
};

/// Square DEM of about `vertices` vertices centred on the origin, with gentle
/// relief so no flat-surface shortcut applies.
Dem synthetic_dem(std::size_t vertices, double spacing, std::uint64_t seed);

/// Mean wall time of one N-frame integral per (renderer, N, vertex count),
/// after `warmups` untimed runs. Deferred timings include building the
/// geometry buffer once per integral. Repetitions are interleaved across points.
std::vector<BenchRow> bench_rendering(const BenchConfig& config);

struct LinearFit {
    double slope = 0, intercept = 0, r2 = 0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace synap

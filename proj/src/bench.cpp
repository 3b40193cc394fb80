#include "synap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "synap/common.hpp"
#include "synap/integral.hpp"
#include "synap/scene.hpp"

namespace synap {

Dem synthetic_dem(std::size_t vertices, double spacing, std::uint64_t seed) {
    if (vertices < 4) throw DomainError("a DEM needs at least four vertices");
    const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(vertices)))));
    const double half = 0.5 * spacing * (side - 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    const double px = phase(rng), py = phase(rng);
    std::vector<double> heights(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
            const double x = -half + spacing * i;
            const double y = -half + spacing * j;
            heights[static_cast<std::size_t>(j) * side + i] =
                0.5 * std::sin(0.21 * x + px) * std::cos(0.17 * y + py);
        }
    }
    std::vector<float> cells(static_cast<std::size_t>(side - 1) * static_cast<std::size_t>(side - 1), 0.1f);
    return Dem(-half, -half, spacing, side, side, std::move(heights), std::move(cells));
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("line fit needs distinct x values");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

std::vector<BenchRow> bench_rendering(const BenchConfig& config) {
    if (config.repetitions < 10) throw DomainError("benchmark needs at least 10 repetitions");
    if (config.warmups < 0) throw DomainError("warm-up count must be non-negative");
    for (int n : config.n_values) {
        if (n < 1) throw DomainError("N must be positive");
    }

    using clock = std::chrono::steady_clock;
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> pixel(0, 65535);

    std::vector<Dem> dems;
    for (const std::size_t vertices : config.vertex_counts) {
        dems.push_back(synthetic_dem(vertices, config.dem_spacing, config.seed));
    }
    // One frame set serves every N; poses are laid out per point before timing.
    const int max_n = config.n_values.empty() ? 0 : *std::max_element(config.n_values.begin(), config.n_values.end());
    std::vector<SingleImage> images(static_cast<std::size_t>(max_n));
    for (auto& img : images) {
        img.width = config.resolution;
        img.pixels.resize(static_cast<std::size_t>(config.resolution) * config.resolution);
        for (auto& p : img.pixels) p = static_cast<std::uint16_t>(pixel(rng));
    }

    struct Point {
        const Dem* dem;
        int n;
        bool deferred;
        std::vector<double> ms;
    };
    std::vector<Point> points;
    for (const Dem& dem : dems) {
        for (const int n : config.n_values) {
            for (const bool deferred : {false, true}) points.push_back({&dem, n, deferred, {}});
        }
    }

    // Repetitions go round-robin over the points so slow drift of the host
    // lands on every point alike instead of on whichever ran last.
    const Pose center{{0.0, 0.0, config.h}, 0.0};
    std::vector<const SingleImage*> frames;
    for (int rep = 0; rep < config.warmups + config.repetitions; ++rep) {
        for (Point& pt : points) {
            frames.clear();
            for (int k = 0; k < pt.n; ++k) {
                auto& img = images[static_cast<std::size_t>(k)];
                img.pose.position = {(k - 0.5 * (pt.n - 1)) * 0.92, 0.0, config.h};
                frames.push_back(&img);
            }
            const auto t0 = clock::now();
            if (pt.deferred) {
                GeometryCache cache;
                integrate_deferred(frames, *pt.dem, center, config.fov, cache);
            } else {
                integrate_classical(frames, *pt.dem, center, config.fov);
            }
            const auto t1 = clock::now();
            if (rep >= config.warmups) pt.ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }

    std::vector<BenchRow> rows;
    for (const Point& pt : points) {
        const double mean = std::accumulate(pt.ms.begin(), pt.ms.end(), 0.0) / static_cast<double>(pt.ms.size());
        double var = 0;
        for (double v : pt.ms) var += (v - mean) * (v - mean);
        BenchRow row;
        row.renderer = pt.deferred ? "deferred" : "classical";
        row.n = pt.n;
        row.vertices = pt.dem->vertex_count();
        row.mean_ms = mean;
        row.std_ms = pt.ms.size() > 1 ? std::sqrt(var / static_cast<double>(pt.ms.size() - 1)) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace synap

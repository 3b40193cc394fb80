#include "synap/occlusion.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "synap/common.hpp"
#include "synap/parallel.hpp"

namespace synap {

void OcclusionParams::validate() const {
    if (!(d >= 0.0 && d < 1.0)) throw DomainError("occluder density d must lie in [0, 1)");
    if (!(o > 0.0) || !std::isfinite(o)) throw DomainError("occluder size o must be positive");
    if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("volume height l must be non-negative");
    if (!(alpha >= 0.0 && alpha < 90.0)) throw DomainError("alpha must lie in [0, 90) degrees");
}

IntegratedDensity integrated_density(const OcclusionParams& params) {
    params.validate();
    // expm1/log1p keep full relative precision for sparse volumes.
    return {-std::expm1(params.layers() * std::log1p(-params.d))};
}

IntegratedDensity oblique_density(IntegratedDensity d_bar, double alpha_deg) {
    if (!(d_bar.value >= 0.0 && d_bar.value <= 1.0)) throw DomainError("d_bar must lie in [0, 1]");
    if (!(alpha_deg >= 0.0 && alpha_deg < 90.0)) throw DomainError("alpha must lie in [0, 90) degrees");
    if (d_bar.value == 1.0) return {1.0};
    return {-std::expm1(std::log1p(-d_bar.value) / std::cos(deg_to_rad(alpha_deg)))};
}

IntegratedDensity oblique_density_direct(const OcclusionParams& params) {
    params.validate();
    const double exponent = params.l / (std::cos(deg_to_rad(params.alpha)) * params.o);
    return {-std::expm1(exponent * std::log1p(-params.d))};
}

namespace {

constexpr std::size_t kOracleChunks = 16;
constexpr double kTileSizeInOccluders = 96.0;

struct Sphere {
    double qx, qy;  // centre projected along the ray direction onto z = 0
    double z;
};

// Uniform-grid index over projected centres on a periodic tile.
class ShadowGrid {
public:
    ShadowGrid(double tile, double cell_hint, std::vector<Sphere> spheres)
        : tile_(tile), spheres_(std::move(spheres)) {
        cells_ = std::max<std::size_t>(1, static_cast<std::size_t>(tile / cell_hint));
        cell_ = tile / static_cast<double>(cells_);
        start_.assign(cells_ * cells_ + 1, 0);
        for (const auto& s : spheres_) ++start_[index(s.qx, s.qy) + 1];
        for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
        order_.resize(spheres_.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < spheres_.size(); ++i) {
            order_[fill[index(spheres_[i].qx, spheres_[i].qy)]++] = static_cast<std::uint32_t>(i);
        }
    }

    // True when the line through ground point (gx, gy) along direction
    // (sin a cos phi, sin a sin phi, cos a) passes within radius of a centre.
    bool blocked(double gx, double gy, double sin_a, double ex, double ey, double r2) const {
        const auto ci = static_cast<long>(gx / cell_);
        const auto cj = static_cast<long>(gy / cell_);
        const auto n = static_cast<long>(cells_);
        for (long dj = -1; dj <= 1; ++dj) {
            const long j = (cj + dj + n) % n;
            for (long di = -1; di <= 1; ++di) {
                const long i = (ci + di + n) % n;
                const std::size_t c = static_cast<std::size_t>(j) * cells_ + static_cast<std::size_t>(i);
                for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) {
                    const Sphere& s = spheres_[order_[k]];
                    const double dx = wrap(s.qx - gx);
                    const double dy = wrap(s.qy - gy);
                    const double along = sin_a * (dx * ex + dy * ey);
                    if (dx * dx + dy * dy - along * along <= r2) return true;
                }
            }
        }
        return false;
    }

private:
    std::size_t index(double x, double y) const {
        auto i = std::min(cells_ - 1, static_cast<std::size_t>(x / cell_));
        auto j = std::min(cells_ - 1, static_cast<std::size_t>(y / cell_));
        return j * cells_ + i;
    }
    double wrap(double v) const {
        if (v > tile_ / 2) return v - tile_;
        if (v < -tile_ / 2) return v + tile_;
        return v;
    }

    double tile_;
    double cell_ = 1.0;
    std::size_t cells_ = 1;
    std::vector<Sphere> spheres_;
    std::vector<std::size_t> start_;
    std::vector<std::uint32_t> order_;
};

std::uint64_t run_chunk(std::uint64_t seed, std::size_t chunk, const OcclusionParams& p,
                        std::uint64_t rays) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), 0x6f636c75u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double r = p.o / 2.0;
    const double tile = kTileSizeInOccluders * p.o;
    const double alpha = deg_to_rad(p.alpha);
    const double sin_a = std::sin(alpha);
    const double tan_a = std::tan(alpha);
    const double phi = 2.0 * kPi * unit(rng);
    const double ex = std::cos(phi);
    const double ey = std::sin(phi);

    // Vertical optical depth of the whole volume.
    const double depth = p.d > 0.0 ? -std::log1p(-p.d) * p.layers() : 0.0;
    const double expected = depth * tile * tile / (kPi * r * r);
    std::vector<Sphere> spheres;
    if (expected > 0.0) {
        std::poisson_distribution<long> count_dist(expected);
        const long count = count_dist(rng);
        // Centres keep the whole sphere inside [0, l] when the volume allows it.
        const double z_lo = p.l >= p.o ? r : p.l / 2.0;
        const double z_hi = p.l >= p.o ? p.l - r : p.l / 2.0;
        spheres.reserve(static_cast<std::size_t>(count));
        for (long k = 0; k < count; ++k) {
            const double x = tile * unit(rng);
            const double y = tile * unit(rng);
            const double z = z_lo + (z_hi - z_lo) * unit(rng);
            double qx = std::fmod(x - z * tan_a * ex, tile);
            double qy = std::fmod(y - z * tan_a * ey, tile);
            if (qx < 0) qx += tile;
            if (qy < 0) qy += tile;
            spheres.push_back({qx, qy, z});
        }
    }
    const ShadowGrid grid(tile, r / std::cos(alpha), std::move(spheres));

    std::uint64_t blocked = 0;
    for (std::uint64_t k = 0; k < rays; ++k) {
        const double gx = tile * unit(rng);
        const double gy = tile * unit(rng);
        if (grid.blocked(gx, gy, sin_a, ex, ey, r * r)) ++blocked;
    }
    return blocked;
}

}  // namespace

OracleResult mc_occlusion_oracle(std::uint64_t seed, const OcclusionParams& params,
                                 std::uint64_t rays) {
    params.validate();
    if (rays < 10000) throw DomainError("oracle needs at least 1e4 rays");

    std::vector<std::uint64_t> per_chunk(kOracleChunks, 0);
    parallel_for(kOracleChunks, [&](std::size_t c) {
        const std::uint64_t share = rays / kOracleChunks + (c < rays % kOracleChunks ? 1 : 0);
        per_chunk[c] = run_chunk(seed, c, params, share);
    });

    OracleResult result;
    result.rays = rays;
    for (auto b : per_chunk) result.blocked += b;
    result.fraction = static_cast<double>(result.blocked) / static_cast<double>(rays);
    result.standard_error =
        std::sqrt(result.fraction * (1.0 - result.fraction) / static_cast<double>(rays));
    return result;
}

}  // namespace synap

#include "synap/dem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "synap/common.hpp"

namespace synap {

namespace {

std::uint64_t next_revision() {
    static std::atomic<std::uint64_t> counter{1};
    return counter++;
}

// Moller-Trumbore; returns t > 0 on hit.
std::optional<double> ray_triangle(Vec3 o, Vec3 d, Vec3 a, Vec3 b, Vec3 c) {
    constexpr double eps = 1e-12;
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = cross(d, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < eps) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = o - a;
    const double bu = dot(s, p) * inv;
    if (bu < -1e-12 || bu > 1.0 + 1e-12) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const double bv = dot(d, q) * inv;
    if (bv < -1e-12 || bu + bv > 1.0 + 1e-12) return std::nullopt;
    const double t = dot(e2, q) * inv;
    if (t <= 0.0) return std::nullopt;
    return t;
}

}  // namespace

Dem::Dem(double x0, double y0, double spacing, int nx, int ny, std::vector<double> heights,
         std::vector<float> cell_intensity)
    : x0_(x0), y0_(y0), spacing_(spacing), nx_(nx), ny_(ny), heights_(std::move(heights)),
      cell_intensity_(std::move(cell_intensity)), revision_(next_revision()) {
    if (nx < 2 || ny < 2) throw DomainError("DEM needs at least 2x2 vertices");
    if (!(spacing > 0.0)) throw DomainError("DEM spacing must be positive");
    if (heights_.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
        throw DomainError("DEM height count does not match grid size");
    }
    if (cell_intensity_.size() != static_cast<std::size_t>(nx - 1) * static_cast<std::size_t>(ny - 1)) {
        throw DomainError("DEM cell intensity count does not match grid size");
    }
    refresh_bounds();
}

Dem Dem::flat(double x0, double y0, double spacing, int nx, int ny, float intensity, double height) {
    std::vector<double> heights(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), height);
    std::vector<float> cells(static_cast<std::size_t>(std::max(nx - 1, 0)) *
                                 static_cast<std::size_t>(std::max(ny - 1, 0)),
                             intensity);
    return Dem(x0, y0, spacing, nx, ny, std::move(heights), std::move(cells));
}

void Dem::refresh_bounds() {
    const auto [lo, hi] = std::minmax_element(heights_.begin(), heights_.end());
    min_z_ = *lo;
    max_z_ = *hi;
    flat_ = min_z_ == max_z_;
}

double Dem::height_at(double x, double y) const {
    if (flat_) return min_z_;
    const double gx = (x - x0_) / spacing_;
    const double gy = (y - y0_) / spacing_;
    const int i = std::clamp(static_cast<int>(gx), 0, nx_ - 2);
    const int j = std::clamp(static_cast<int>(gy), 0, ny_ - 2);
    const double fx = gx - i;
    const double fy = gy - j;
    const double za = heights_[index(i, j)];
    const double zb = heights_[index(i + 1, j)];
    const double zc = heights_[index(i, j + 1)];
    const double zd = heights_[index(i + 1, j + 1)];
    if (fx >= fy) return za + fx * (zb - za) + fy * (zd - zb);
    return za + fy * (zc - za) + fx * (zd - zc);
}

float Dem::intensity_at(double x, double y) const {
    const int i = std::clamp(static_cast<int>((x - x0_) / spacing_), 0, nx_ - 2);
    const int j = std::clamp(static_cast<int>((y - y0_) / spacing_), 0, ny_ - 2);
    return cell_intensity_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_ - 1) +
                           static_cast<std::size_t>(i)];
}

std::optional<double> Dem::intersect(Vec3 origin, Vec3 dir) const {
    if (flat_) {
        if (dir.z == 0.0) return std::nullopt;
        const double t = (min_z_ - origin.z) / dir.z;
        if (!(t > 0.0)) return std::nullopt;
        const double x = origin.x + t * dir.x;
        const double y = origin.y + t * dir.y;
        if (!contains(x, y)) return std::nullopt;
        return t;
    }

    // Restrict the ray to the slab that holds the surface, then walk cells.
    constexpr double inf = std::numeric_limits<double>::infinity();
    double t0 = 0.0, t1 = inf;
    if (dir.z != 0.0) {
        double ta = (max_z_ - origin.z) / dir.z;
        double tb = (min_z_ - origin.z) / dir.z;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    } else if (origin.z < min_z_ || origin.z > max_z_) {
        return std::nullopt;
    }
    for (int axis = 0; axis < 2; ++axis) {
        const double o = axis == 0 ? origin.x : origin.y;
        const double d = axis == 0 ? dir.x : dir.y;
        const double lo = axis == 0 ? x0_ : y0_;
        const double hi = axis == 0 ? x1() : y1();
        if (d == 0.0) {
            if (o < lo || o > hi) return std::nullopt;
            continue;
        }
        double ta = (lo - o) / d;
        double tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t0 > t1) return std::nullopt;

    const double sx = origin.x + t0 * dir.x;
    const double sy = origin.y + t0 * dir.y;
    int i = std::clamp(static_cast<int>((sx - x0_) / spacing_), 0, nx_ - 2);
    int j = std::clamp(static_cast<int>((sy - y0_) / spacing_), 0, ny_ - 2);
    const int step_i = dir.x > 0 ? 1 : -1;
    const int step_j = dir.y > 0 ? 1 : -1;
    auto boundary_t = [&](double o, double d, double base, int cell, int step) {
        if (d == 0.0) return inf;
        const double edge = base + spacing_ * (cell + (step > 0 ? 1 : 0));
        return (edge - o) / d;
    };
    double next_x = boundary_t(origin.x, dir.x, x0_, i, step_i);
    double next_y = boundary_t(origin.y, dir.y, y0_, j, step_j);
    const double dt_x = dir.x == 0.0 ? inf : spacing_ / std::abs(dir.x);
    const double dt_y = dir.y == 0.0 ? inf : spacing_ / std::abs(dir.y);

    while (i >= 0 && i < nx_ - 1 && j >= 0 && j < ny_ - 1) {
        const Vec3 a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i, j + 1), d = vertex(i + 1, j + 1);
        auto h1 = ray_triangle(origin, dir, a, b, d);
        auto h2 = ray_triangle(origin, dir, a, d, c);
        std::optional<double> best = h1;
        if (h2 && (!best || *h2 < *best)) best = h2;
        if (best) return best;
        if (std::min(next_x, next_y) > t1) break;
        if (next_x < next_y) {
            i += step_i;
            next_x += dt_x;
        } else {
            j += step_j;
            next_y += dt_y;
        }
    }
    return std::nullopt;
}

void Dem::set_height(int i, int j, double z) {
    heights_[index(i, j)] = z;
    refresh_bounds();
    revision_ = next_revision();
}

void Dem::set_cell_intensity(int i, int j, float value) {
    cell_intensity_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_ - 1) +
                    static_cast<std::size_t>(i)] = value;
}

}  // namespace synap

#include "synap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "synap/common.hpp"
#include "synap/parallel.hpp"

namespace synap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t sub = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      stream, sub};
    return std::mt19937_64(seq);
}

std::optional<double> ray_sphere(Vec3 origin, Vec3 dir, const Occluder& s) {
    const double r = 0.5 * s.diameter;
    const Vec3 oc = origin - s.center;
    const double a = dot(dir, dir);
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - r * r;
    const double disc = b * b - a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t = (-b - sq) / a;
    if (t <= 0.0) t = (-b + sq) / a;
    if (t <= 0.0) return std::nullopt;
    return t;
}

}  // namespace

OccluderField::OccluderField(std::vector<Occluder> occluders, Extent extent)
    : occluders_(std::move(occluders)), extent_(extent) {
    if (occluders_.empty()) return;
    double max_d = 0;
    z_top_ = -kInf;
    z_bottom_ = kInf;
    for (const auto& o : occluders_) {
        max_d = std::max(max_d, o.diameter);
        z_top_ = std::max(z_top_, o.center.z + 0.5 * o.diameter);
        z_bottom_ = std::min(z_bottom_, o.center.z - 0.5 * o.diameter);
    }
    // Grid covers the extent plus one occluder on every side.
    extent_.x0 -= max_d;
    extent_.y0 -= max_d;
    extent_.x1 += max_d;
    extent_.y1 += max_d;
    cell_ = std::max(max_d, 0.25);
    cols_ = std::max(1, static_cast<int>(std::ceil(extent_.width() / cell_)));
    rows_ = std::max(1, static_cast<int>(std::ceil(extent_.height() / cell_)));

    const auto cells = static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_);
    start_.assign(cells + 1, 0);
    auto for_each_cell = [&](const Occluder& o, auto&& fn) {
        const double r = 0.5 * o.diameter;
        const int i0 = std::clamp(static_cast<int>((o.center.x - r - extent_.x0) / cell_), 0, cols_ - 1);
        const int i1 = std::clamp(static_cast<int>((o.center.x + r - extent_.x0) / cell_), 0, cols_ - 1);
        const int j0 = std::clamp(static_cast<int>((o.center.y - r - extent_.y0) / cell_), 0, rows_ - 1);
        const int j1 = std::clamp(static_cast<int>((o.center.y + r - extent_.y0) / cell_), 0, rows_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) fn(static_cast<std::size_t>(j) * cols_ + i);
    };
    for (const auto& o : occluders_) for_each_cell(o, [&](std::size_t c) { ++start_[c + 1]; });
    for (std::size_t c = 1; c <= cells; ++c) start_[c] += start_[c - 1];
    items_.resize(start_.back());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < occluders_.size(); ++k) {
        for_each_cell(occluders_[k], [&](std::size_t c) { items_[fill[c]++] = static_cast<std::uint32_t>(k); });
    }
}

std::optional<OccluderField::Hit> OccluderField::first_hit(Vec3 origin, Vec3 dir, double t_max) const {
    if (occluders_.empty()) return std::nullopt;

    double t0 = 0.0, t1 = t_max;
    if (dir.z != 0.0) {
        double ta = (z_top_ - origin.z) / dir.z;
        double tb = (z_bottom_ - origin.z) / dir.z;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    } else if (origin.z > z_top_ || origin.z < z_bottom_) {
        return std::nullopt;
    }
    const double lo[2] = {extent_.x0, extent_.y0};
    const double hi[2] = {extent_.x1, extent_.y1};
    const double o[2] = {origin.x, origin.y};
    const double d[2] = {dir.x, dir.y};
    for (int a = 0; a < 2; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (!(t0 <= t1)) return std::nullopt;

    int i = std::clamp(static_cast<int>((origin.x + t0 * dir.x - extent_.x0) / cell_), 0, cols_ - 1);
    int j = std::clamp(static_cast<int>((origin.y + t0 * dir.y - extent_.y0) / cell_), 0, rows_ - 1);
    const int si = dir.x > 0 ? 1 : -1;
    const int sj = dir.y > 0 ? 1 : -1;
    double next_x = dir.x == 0.0 ? kInf : (extent_.x0 + cell_ * (i + (si > 0)) - origin.x) / dir.x;
    double next_y = dir.y == 0.0 ? kInf : (extent_.y0 + cell_ * (j + (sj > 0)) - origin.y) / dir.y;
    const double dtx = dir.x == 0.0 ? kInf : cell_ / std::abs(dir.x);
    const double dty = dir.y == 0.0 ? kInf : cell_ / std::abs(dir.y);

    std::optional<Hit> best;
    while (true) {
        const std::size_t c = static_cast<std::size_t>(j) * cols_ + i;
        for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) {
            const auto t = ray_sphere(origin, dir, occluders_[items_[k]]);
            if (t && *t < t_max && (!best || *t < best->t)) best = Hit{*t, items_[k]};
        }
        const double cell_exit = std::min(next_x, next_y);
        if (best && best->t <= cell_exit) return best;
        if (cell_exit > t1) break;
        if (next_x < next_y) {
            i += si;
            next_x += dtx;
        } else {
            j += sj;
            next_y += dty;
        }
        if (i < 0 || i >= cols_ || j < 0 || j >= rows_) break;
    }
    return best;
}

const Person* Scene::person_at(double x, double y) const {
    for (const auto& p : persons) {
        const double dx = x - p.x;
        const double dy = y - p.y;
        if (dx * dx + dy * dy <= p.radius * p.radius) return &p;
    }
    return nullptr;
}

Scene generate_forest(const SceneConfig& config, std::uint64_t seed) {
    const auto& occ = config.occlusion;
    occ.validate();
    const Extent& ext = config.extent;
    if (!(ext.width() >= 2.0 * occ.o && ext.height() >= 2.0 * occ.o)) {
        throw DomainError("scene extent must exceed the occluder size by a margin on every side");
    }
    if (!(config.dem_spacing > 0.0)) throw DomainError("DEM spacing must be positive");

    const int nx = static_cast<int>(std::floor(ext.width() / config.dem_spacing + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(ext.height() / config.dem_spacing + 1e-9)) + 1;
    if (nx < 2 || ny < 2) throw DomainError("scene extent is smaller than one DEM cell");

    const auto& im = config.intensity;
    auto ground_rng = make_rng(seed, 1);
    std::uniform_real_distribution<double> noise(-im.ground_noise, im.ground_noise);
    std::vector<float> cells(static_cast<std::size_t>(nx - 1) * static_cast<std::size_t>(ny - 1));
    for (auto& c : cells) {
        c = static_cast<float>(std::clamp(im.ground + (im.ground_noise > 0 ? noise(ground_rng) : 0.0), 0.0, 1.0));
    }
    Dem dem(ext.x0, ext.y0, config.dem_spacing, nx, ny,
            std::vector<double>(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0),
            std::move(cells));

    // Poisson spheres: a vertical path of length o is blocked with probability d.
    std::vector<Occluder> occluders;
    const double r = 0.5 * occ.o;
    const double depth = occ.d > 0.0 ? -std::log1p(-occ.d) * occ.layers() : 0.0;
    const double expected = depth * ext.width() * ext.height() / (kPi * r * r);
    if (expected > 0.0) {
        auto rng = make_rng(seed, 2);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::poisson_distribution<long> count_dist(expected);
        const long count = count_dist(rng);
        const double z_lo = occ.l >= occ.o ? r : occ.l / 2.0;
        const double z_hi = occ.l >= occ.o ? occ.l - r : occ.l / 2.0;
        occluders.reserve(static_cast<std::size_t>(count));
        for (long k = 0; k < count; ++k) {
            Occluder o;
            o.center.x = ext.x0 + ext.width() * unit(rng);
            o.center.y = ext.y0 + ext.height() * unit(rng);
            o.center.z = z_lo + (z_hi - z_lo) * unit(rng);
            o.diameter = occ.o;
            o.intensity = im.occluder;
            const double warm_roll = unit(rng);
            const double warm_level = unit(rng);
            if (o.center.z >= im.warm_min_height * occ.l && warm_roll < im.warm_fraction) {
                o.intensity = im.warm_low + (im.warm_high - im.warm_low) * warm_level;
            }
            occluders.push_back(o);
        }
    }

    return Scene{config, std::move(dem), OccluderField(std::move(occluders), ext), {}};
}

Scene generate_forest(Extent extent, const OcclusionParams& occlusion, std::uint64_t seed) {
    SceneConfig config;
    config.extent = extent;
    config.occlusion = occlusion;
    return generate_forest(config, seed);
}

void add_person(Scene& scene, double x, double y, double radius) {
    if (!scene.dem.contains(x, y)) throw DomainError("person lies outside the DEM");
    if (!(radius > 0.0)) throw DomainError("person radius must be positive");
    scene.persons.push_back({x, y, radius, scene.config.intensity.person});
}

double vertical_block_fraction(const Scene& scene, Extent region, std::size_t rays,
                               std::uint64_t seed) {
    auto rng = make_rng(seed, 3);
    std::uniform_real_distribution<double> ux(region.x0, region.x1);
    std::uniform_real_distribution<double> uy(region.y0, region.y1);
    const double top = scene.config.occlusion.l + scene.config.occlusion.o + 1.0;
    std::size_t blocked = 0;
    for (std::size_t k = 0; k < rays; ++k) {
        const Vec3 origin{ux(rng), uy(rng), top};
        if (scene.occluders.first_hit(origin, {0, 0, -1}, top)) ++blocked;
    }
    return rays ? static_cast<double>(blocked) / static_cast<double>(rays) : 0.0;
}

std::vector<Pose> interpolate_poses(std::span<const GpsFix> fixes, std::span<const double> frame_times) {
    if (fixes.size() < 2) throw DomainError("pose interpolation needs at least two GPS fixes");
    for (std::size_t k = 1; k < fixes.size(); ++k) {
        if (!(fixes[k].timestamp > fixes[k - 1].timestamp)) {
            throw DomainError("GPS fix timestamps must be strictly increasing");
        }
    }
    std::vector<Pose> poses;
    poses.reserve(frame_times.size());
    for (const double t : frame_times) {
        if (t < fixes.front().timestamp || t > fixes.back().timestamp) {
            throw DomainError("frame time outside the GPS fix range");
        }
        auto hi = std::upper_bound(fixes.begin(), fixes.end(), t,
                                   [](double v, const GpsFix& f) { return v < f.timestamp; });
        if (hi == fixes.end()) {
            poses.push_back({fixes.back().position, t});
            continue;
        }
        const GpsFix& b = *hi;
        const GpsFix& a = *(hi - 1);
        if (t == a.timestamp) {
            poses.push_back({a.position, t});
            continue;
        }
        const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
        poses.push_back({a.position + w * (b.position - a.position), t});
    }
    return poses;
}

std::uint16_t quantize16(double intensity) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(intensity, 0.0, 1.0) * 65535.0));
}

namespace {

SingleImage render_impl(const Scene& scene, Vec3 position, const Pose& pose, double fov_deg,
                        int resolution, double noise_sd, std::mt19937_64* rng) {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw DomainError("fov must lie in (0, 180) degrees");
    if (resolution <= 0) throw DomainError("resolution must be positive");
    const PinholeCamera camera(position, fov_deg, resolution);
    const auto& im = scene.config.intensity;

    SingleImage image;
    image.width = resolution;
    image.pose = pose;
    image.pixels.resize(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    std::normal_distribution<double> noise(0.0, noise_sd > 0 ? noise_sd : 1.0);

    for (int row = 0; row < resolution; ++row) {
        for (int col = 0; col < resolution; ++col) {
            const Vec3 dir = camera.ray_direction(col + 0.5, row + 0.5);
            const auto t_ground = scene.dem.intersect(position, dir);
            const auto hit = scene.occluders.first_hit(position, dir, t_ground.value_or(kInf));
            double value;
            if (hit) {
                value = scene.occluders.occluders()[hit->index].intensity;
            } else if (!t_ground) {
                value = im.ambient;
                ++image.out_of_extent;
            } else {
                const Vec3 p = position + (*t_ground) * dir;
                if (const Person* person = scene.person_at(p.x, p.y)) {
                    value = person->intensity;
                } else {
                    value = scene.dem.intensity_at(p.x, p.y);
                }
            }
            if (noise_sd > 0 && rng) value += noise(*rng);
            image.pixels[static_cast<std::size_t>(row) * resolution + col] = quantize16(value);
        }
    }
    return image;
}

}  // namespace

SingleImage render_single_image(const Scene& scene, const Pose& pose, double fov_deg, int resolution) {
    return render_impl(scene, pose.position, pose, fov_deg, resolution, 0.0, nullptr);
}

double FlightPath::length() const { return std::hypot(x1 - x0, y1 - y0); }

std::size_t scan_frame_count(const FlightParams& params, const FlightPath& path) {
    const double spacing = params.v_f * params.t_i;
    const double length = path.length();
    if (length == 0.0) return 1;
    const auto n = static_cast<std::size_t>(std::floor(length / spacing * (1.0 + 1e-12)));
    return std::max<std::size_t>(n, 1);
}

std::vector<Frame> fly_scan(const Scene& scene, const FlightParams& params, const FlightPath& path,
                            std::uint64_t seed, const ScanOptions& options) {
    params.validate();
    if (!scene.dem.contains(path.x0, path.y0) || !scene.dem.contains(path.x1, path.y1)) {
        throw DomainError("flight path must lie inside the scene");
    }
    if (!(options.gps_rate > 0.0)) throw DomainError("GPS rate must be positive");

    const double length = path.length();
    const double ux = length > 0 ? (path.x1 - path.x0) / length : 1.0;
    const double uy = length > 0 ? (path.y1 - path.y0) / length : 0.0;
    const double ground = scene.dem.height_at(path.x0, path.y0);
    auto true_position = [&](double t) {
        const double s = params.v_f * t;
        return Vec3{path.x0 + s * ux, path.y0 + s * uy, ground + params.h};
    };

    const std::size_t count = scan_frame_count(params, path);
    std::vector<double> lookup_times(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double stamp = static_cast<double>(k) * params.t_i + options.capture_delay;
        lookup_times[k] = stamp - options.delay_compensation;
    }

    // GPS fixes on the fix-rate grid, bracketing every lookup time.
    const double period = 1.0 / options.gps_rate;
    const auto [lo, hi] = std::minmax_element(lookup_times.begin(), lookup_times.end());
    const auto j0 = static_cast<long>(std::floor(*lo / period)) - 1;
    const auto j1 = static_cast<long>(std::ceil(*hi / period)) + 1;
    std::vector<GpsFix> fixes;
    for (long j = j0; j <= j1; ++j) {
        const double t = static_cast<double>(j) * period;
        fixes.push_back({t, true_position(t)});
    }
    const auto poses = interpolate_poses(fixes, lookup_times);

    std::vector<Frame> frames(count);
    parallel_for(count, [&](std::size_t k) {
        Frame& f = frames[k];
        f.pose = poses[k];
        f.pose.timestamp = static_cast<double>(k) * params.t_i + options.capture_delay;
        f.true_position = true_position(static_cast<double>(k) * params.t_i);
        if (options.render_filter && !options.render_filter(k)) return;
        auto rng = make_rng(seed, 4, static_cast<std::uint32_t>(k));
        f.image = render_impl(scene, f.true_position, f.pose, params.fov, options.resolution,
                              options.sensor_noise, &rng);
        f.rendered = true;
    });
    return frames;
}

}  // namespace synap

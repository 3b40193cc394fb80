#include "synap/integral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synap/common.hpp"
#include "synap/parallel.hpp"
#include "synap/simd/kernels.hpp"

namespace synap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNear = 1e-6;  // triangles closer than this to the camera plane are not drawn

simd::CameraParams camera_params(const PinholeCamera& cam) {
    const Vec3 p = cam.position();
    return {p.x, p.y, p.z, cam.focal(), cam.half_width(), cam.width()};
}

// Ground rectangle the camera can see on any surface point of the DEM.
bool footprint_hits_dem(const Dem& dem, const PinholeCamera& cam) {
    const Vec3 p = cam.position();
    const double reach = p.z - dem.min_height();
    if (!(reach > 0.0)) return false;
    const double half = reach * cam.half_width() / cam.focal();
    return p.x + half >= dem.x0() && p.x - half <= dem.x1() && p.y + half >= dem.y0() &&
           p.y - half <= dem.y1();
}

// Scratch space reused across geometry passes on the same thread.
struct RasterScratch {
    std::vector<double> dir_x, dir_y, row_x, row_y;
    std::vector<double> u[2], v[2], w[2];
    std::vector<std::uint8_t> code[2];
};

// Outcode bits: left, right, top, bottom of the pixel-centre range, too near.
constexpr std::uint8_t kNearBit = 16;

class Rasterizer {
public:
    Rasterizer(const Dem& dem, const PinholeCamera& cam, GeometryBuffer& out, RasterScratch& s)
        : dem_(dem), cam_(cam), out_(out), s_(s), size_(cam.width()) {
        s_.dir_x.resize(static_cast<std::size_t>(size_));
        s_.dir_y.resize(static_cast<std::size_t>(size_));
        for (int k = 0; k < size_; ++k) {
            // World ray through pixel centre k: x = xc, y = -yc, z = -1.
            s_.dir_x[k] = (k + 0.5 - cam.half_width()) / cam.focal();
            s_.dir_y[k] = -((k + 0.5 - cam.half_width()) / cam.focal());
        }
    }

    void run() {
        const int nx = dem_.nx();
        const int ny = dem_.ny();
        const auto n = static_cast<std::size_t>(nx);
        s_.row_x.resize(n);
        s_.row_y.resize(n);
        for (int r = 0; r < 2; ++r) {
            s_.u[r].resize(n);
            s_.v[r].resize(n);
            s_.w[r].resize(n);
            s_.code[r].resize(n);
        }
        for (int i = 0; i < nx; ++i) s_.row_x[i] = dem_.x0() + dem_.spacing() * i;

        // Vertex rows are transformed one at a time; two rows are live.
        transform_row(0, 0);
        for (int j = 0; j + 1 < ny; ++j) {
            const int lo = j & 1;
            const int hi = lo ^ 1;
            transform_row(j + 1, hi);
            const std::uint8_t* c0 = s_.code[lo].data();
            const std::uint8_t* c1 = s_.code[hi].data();
            for (int i = 0; i + 1 < nx; ++i) {
                const std::uint8_t all = c0[i] & c0[i + 1] & c1[i] & c1[i + 1];
                const std::uint8_t any = c0[i] | c0[i + 1] | c1[i] | c1[i + 1];
                if (all != 0 || (any & kNearBit)) continue;
                const Corner a{i, j, lo}, b{i + 1, j, lo}, c{i, j + 1, hi}, d{i + 1, j + 1, hi};
                quad(a, b, c, d);
            }
        }
    }

private:
    struct Corner {
        int i, j, slot;
    };

    void transform_row(int j, int slot) {
        const auto n = static_cast<std::size_t>(dem_.nx());
        std::fill(s_.row_y.begin(), s_.row_y.end(), dem_.y0() + dem_.spacing() * j);
        const double* z = dem_.heights().data() + static_cast<std::size_t>(j) * n;
        double* u = s_.u[slot].data();
        double* v = s_.v[slot].data();
        double* w = s_.w[slot].data();
        simd::transform(camera_params(cam_), s_.row_x.data(), s_.row_y.data(), z, n, u, v, w);
        const double lo = 0.5;
        const double hi = size_ - 0.5;
        std::uint8_t* code = s_.code[slot].data();
        for (std::size_t i = 0; i < n; ++i) {
            code[i] = static_cast<std::uint8_t>((u[i] < lo) | ((u[i] > hi) << 1) | ((v[i] < lo) << 2) |
                                                ((v[i] > hi) << 3) | (!(w[i] > kNear) << 4));
        }
    }

    // Edge p -> q as a * x + b * y + c; positive on the left in screen space.
    struct Edge {
        double a, b, c;
        static Edge make(double up, double vp, double uq, double vq, double sign) {
            return {-(vq - vp) * sign, (uq - up) * sign, ((vq - vp) * up - (uq - up) * vp) * sign};
        }
        double tol() const { return -1e-9 * (std::abs(a) + std::abs(b) + std::abs(c)); }
    };

    struct Plane {
        Vec3 n;
        double k = 0;
    };

    Plane plane(Corner p0, Corner p1, Corner p2) const {
        const Vec3 A = dem_.vertex(p0.i, p0.j);
        const Vec3 n = cross(dem_.vertex(p1.i, p1.j) - A, dem_.vertex(p2.i, p2.j) - A);
        return {n, dot(n, A - cam_.position())};
    }

    // One grid cell: triangles (a, b, d) and (a, d, c) share the diagonal a-d.
    void quad(Corner a, Corner b, Corner c, Corner d) {
        const double ua = s_.u[a.slot][a.i], va = s_.v[a.slot][a.i];
        const double ub = s_.u[b.slot][b.i], vb = s_.v[b.slot][b.i];
        const double uc = s_.u[c.slot][c.i], vc = s_.v[c.slot][c.i];
        const double ud = s_.u[d.slot][d.i], vd = s_.v[d.slot][d.i];
        const int c0 = std::max(0, static_cast<int>(std::ceil(std::min(std::min(ua, ub), std::min(uc, ud)) - 0.5)));
        const int c1 = std::min(size_ - 1, static_cast<int>(std::floor(std::max(std::max(ua, ub), std::max(uc, ud)) - 0.5)));
        const int r0 = std::max(0, static_cast<int>(std::ceil(std::min(std::min(va, vb), std::min(vc, vd)) - 0.5)));
        const int r1 = std::min(size_ - 1, static_cast<int>(std::floor(std::max(std::max(va, vb), std::max(vc, vd)) - 0.5)));
        if (c0 > c1 || r0 > r1) return;

        const double area1 = (ub - ua) * (vd - va) - (vb - va) * (ud - ua);
        const double area2 = (ud - ua) * (vc - va) - (vd - va) * (uc - ua);
        const bool has1 = area1 != 0.0;
        const bool has2 = area2 != 0.0;
        if (!has1 && !has2) return;
        const double s1 = area1 > 0 ? 1.0 : -1.0;
        const double s2 = area2 > 0 ? 1.0 : -1.0;
        // Triangle 1 edges a->b, b->d, d->a; triangle 2 edges a->d, d->c, c->a.
        const Edge e[6] = {Edge::make(ua, va, ub, vb, s1), Edge::make(ub, vb, ud, vd, s1),
                           Edge::make(ud, vd, ua, va, s1), Edge::make(ua, va, ud, vd, s2),
                           Edge::make(ud, vd, uc, vc, s2), Edge::make(uc, vc, ua, va, s2)};
        double tol[6];
        for (int k = 0; k < 6; ++k) tol[k] = e[k].tol();
        const Plane pl[2] = {has1 ? plane(a, b, d) : Plane{}, has2 ? plane(a, d, c) : Plane{}};
        const Vec3 P = cam_.position();

        simd::QuadSetup q;
        for (int k = 0; k < 6; ++k) {
            q.span.ea[k] = e[k].a;
            q.span.tol[k] = (k < 3 ? has1 : has2) ? tol[k] : std::numeric_limits<double>::infinity();
            q.eb[k] = e[k].b;
            q.ec[k] = e[k].c;
        }
        for (int k = 0; k < 2; ++k) {
            q.span.nx[k] = pl[k].n.x;
            q.span.k[k] = pl[k].k;
            q.ny[k] = pl[k].n.y;
            q.nz[k] = pl[k].n.z;
        }
        q.span.px = P.x;
        q.span.py = P.y;
        q.span.pz = P.z;
        q.c0 = c0;
        q.c1 = c1;
        q.r0 = r0;
        q.r1 = r1;
        simd::raster_quad(q, size_, s_.dir_x.data(), s_.dir_y.data(), out_.x.data(),
                          out_.y.data(), out_.z.data());
    }

    const Dem& dem_;
    const PinholeCamera& cam_;
    GeometryBuffer& out_;
    RasterScratch& s_;
    int size_;
};

void shade(const GeometryBuffer& geo, const SingleImage& frame, double fov_deg,
           std::vector<std::uint32_t>& sum, std::vector<std::uint32_t>& count) {
    const PinholeCamera src(frame.pose.position, fov_deg, frame.width);
    simd::project_accumulate(camera_params(src), geo.x.data(), geo.y.data(), geo.z.data(),
                             geo.x.size(), frame.pixels.data(), sum.data(), count.data());
}

void check_frames(std::span<const SingleImage* const> frames) {
    if (frames.empty()) throw DomainError("an integral needs at least one frame");
    for (const SingleImage* f : frames) {
        if (!f || f->width <= 0 ||
            f->pixels.size() != static_cast<std::size_t>(f->width) * static_cast<std::size_t>(f->width)) {
            throw DomainError("integral input frame has no pixels");
        }
    }
}

IntegralImage finish(int width, double fov_deg, const Pose& center, std::size_t excluded,
                     const std::vector<std::uint32_t>& sum, std::vector<std::uint32_t> count) {
    IntegralImage out;
    out.width = width;
    out.fov = fov_deg;
    out.center_pose = center;
    out.excluded = excluded;
    out.pixels.resize(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        out.pixels[i] = count[i] ? sum[i] / (count[i] * 65535.0) : kNaN;
    }
    out.count = std::move(count);
    return out;
}

}  // namespace

void build_geometry(const Dem& dem, const Pose& center, double fov_deg, int width, GeometryBuffer& out) {
    const PinholeCamera cam(center.position, fov_deg, width);
    out.width = width;
    out.fov = fov_deg;
    out.center_pose = center;
    out.dem_revision = dem.revision();
    const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(width);
    out.x.resize(pixels);
    out.y.resize(pixels);
    // Every ray points straight down, so the highest hit is the nearest and z
    // serves as the depth buffer.
    out.z.assign(pixels, -std::numeric_limits<double>::infinity());
    thread_local RasterScratch scratch;
    Rasterizer(dem, cam, out, scratch).run();
    for (std::size_t i = 0; i < pixels; ++i) {
        if (out.z[i] == -std::numeric_limits<double>::infinity()) {
            out.x[i] = kNaN;
            out.y[i] = kNaN;
            out.z[i] = kNaN;
        }
    }
}

GeometryBuffer build_geometry(const Dem& dem, const Pose& center, double fov_deg, int width) {
    GeometryBuffer out;
    build_geometry(dem, center, fov_deg, width, out);
    return out;
}

void quantize_integral(IntegralImage& integral) {
    for (std::size_t i = 0; i < integral.pixels.size(); ++i) {
        if (integral.count[i]) integral.pixels[i] = quantize16(integral.pixels[i]) / 65535.0;
    }
}

IntegralImage integrate_classical(std::span<const SingleImage* const> frames, const Dem& dem,
                                  const Pose& center, double fov_deg) {
    check_frames(frames);
    const int width = frames.front()->width;
    const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(width);
    std::vector<std::uint32_t> sum(pixels, 0), count(pixels, 0);
    std::size_t excluded = 0;
    GeometryBuffer geo;
    for (const SingleImage* f : frames) {
        if (!footprint_hits_dem(dem, PinholeCamera(f->pose.position, fov_deg, f->width))) {
            ++excluded;
            continue;
        }
        build_geometry(dem, center, fov_deg, width, geo);
        shade(geo, *f, fov_deg, sum, count);
    }
    return finish(width, fov_deg, center, excluded, sum, std::move(count));
}

IntegralImage integrate_deferred(std::span<const SingleImage* const> frames, const Dem& dem,
                                 const Pose& center, double fov_deg, GeometryCache& cache) {
    check_frames(frames);
    const int width = frames.front()->width;
    if (!cache.buffer || !cache.buffer->valid_for(dem, center, fov_deg, width)) {
        if (!cache.buffer) cache.buffer.emplace();
        build_geometry(dem, center, fov_deg, width, *cache.buffer);
        ++cache.passes;
    }
    const GeometryBuffer& geo = *cache.buffer;
    std::vector<std::uint32_t> sum(geo.x.size(), 0), count(geo.x.size(), 0);
    std::size_t excluded = 0;
    for (const SingleImage* f : frames) {
        if (!footprint_hits_dem(dem, PinholeCamera(f->pose.position, fov_deg, f->width))) {
            ++excluded;
            continue;
        }
        shade(geo, *f, fov_deg, sum, count);
    }
    return finish(width, fov_deg, center, excluded, sum, std::move(count));
}

std::vector<Window> window_schedule(std::size_t frame_count, const FlightParams& params,
                                    const SamplingPlan& plan) {
    params.validate();
    if (plan.n < 1) throw DomainError("window length must be at least one frame");
    const double unit = params.v_f * params.t_i;
    // Sample k of a window sits k * d_i past the window start, snapped to the
    // nearest video frame; windows start every d_f, also snapped.
    const double stride = std::max(1.0, params.d_i / unit);
    const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(plan.d_f / unit)));
    std::vector<std::size_t> offsets(static_cast<std::size_t>(plan.n));
    for (int k = 0; k < plan.n; ++k) {
        offsets[static_cast<std::size_t>(k)] = static_cast<std::size_t>(std::lround(k * stride));
    }

    std::vector<Window> windows;
    for (std::size_t start = 0; start + offsets.back() < frame_count; start += step) {
        Window w;
        w.frames.reserve(offsets.size());
        for (const std::size_t o : offsets) w.frames.push_back(start + o);
        windows.push_back(std::move(w));
    }
    return windows;
}

Pose center_pose(std::span<const Frame> frames, const Window& window) {
    if (window.frames.empty()) throw DomainError("empty window");
    Vec3 sum;
    double t = 0;
    for (const std::size_t k : window.frames) {
        sum = sum + frames[k].pose.position;
        t += frames[k].pose.timestamp;
    }
    const double inv = 1.0 / static_cast<double>(window.frames.size());
    return {inv * sum, t * inv};
}

std::vector<IntegralImage> sliding_integrals(std::span<const Frame> frames, const Dem& dem,
                                             const FlightParams& params, const SamplingPlan& plan,
                                             bool deferred) {
    const auto windows = window_schedule(frames.size(), params, plan);
    for (const auto& w : windows) {
        for (const std::size_t k : w.frames) {
            if (!frames[k].rendered) throw DomainError("window references a frame without pixels");
        }
    }
    std::vector<IntegralImage> out(windows.size());
    parallel_for(windows.size(), [&](std::size_t w) {
        std::vector<const SingleImage*> images;
        for (const std::size_t k : windows[w].frames) images.push_back(&frames[k].image);
        const Pose center = center_pose(frames, windows[w]);
        GeometryCache cache;
        out[w] = deferred ? integrate_deferred(images, dem, center, params.fov, cache)
                          : integrate_classical(images, dem, center, params.fov);
        out[w].frames = windows[w].frames;
    });
    return out;
}

}  // namespace synap

#include "synap/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "synap/common.hpp"

namespace synap {

const char* method_name(Method m) {
    switch (m) {
        case Method::maximum: return "maximum";
        case Method::median: return "median";
        case Method::max_median: return "max_median";
    }
    return "?";
}

double combine(std::span<const double> scores, Method method) {
    if (scores.empty()) throw DomainError("cannot combine an empty score list");
    const double mx = *std::max_element(scores.begin(), scores.end());
    if (method == Method::maximum) return mx;
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return method == Method::median ? med : mx * med;
}

std::array<std::optional<Vec3>, 4> project_aabb_to_ground(const Aabb& box, const IntegralImage& integral,
                                                           const Dem& dem) {
    const PinholeCamera cam(integral.center_pose.position, integral.fov, integral.width);
    const double us[4] = {double(box.c0), double(box.c1 + 1), double(box.c1 + 1), double(box.c0)};
    const double vs[4] = {double(box.r0), double(box.r0), double(box.r1 + 1), double(box.r1 + 1)};
    std::array<std::optional<Vec3>, 4> out;
    for (int k = 0; k < 4; ++k) {
        const Vec3 dir = cam.ray_direction(us[k], vs[k]);
        if (const auto t = dem.intersect(cam.position(), dir)) out[k] = cam.position() + (*t) * dir;
    }
    return out;
}

ConfidenceMap::ConfidenceMap(Extent extent, double cell_size, double o_f)
    : extent_(extent), cell_(cell_size), o_f_(o_f) {
    if (!(cell_size > 0.0)) throw DomainError("cell size must be positive");
    if (!(o_f > 0.0)) throw DomainError("overlap factor must be positive");
    if (!(extent.width() > 0.0 && extent.height() > 0.0)) throw DomainError("map extent is empty");
    cols_ = std::max(1, static_cast<int>(std::ceil(extent.width() / cell_size - 1e-9)));
    rows_ = std::max(1, static_cast<int>(std::ceil(extent.height() / cell_size - 1e-9)));
    cap_ = std::max(1, static_cast<int>(std::ceil(o_f - 1e-9)));
    full_ = std::max(1, static_cast<int>(std::floor(o_f + 1e-9)));
    cells_.resize(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_));
}

std::size_t ConfidenceMap::project_detections(std::span<const Detection> detections,
                                              const IntegralImage& integral, const Dem& dem,
                                              int integral_index) {
    std::size_t clipped = 0;
    for (const auto& d : detections) {
        for (const auto& corner : project_aabb_to_ground(d.box, integral, dem)) {
            if (!corner || corner->x < extent_.x0 || corner->x > extent_.x1 || corner->y < extent_.y0 ||
                corner->y > extent_.y1) {
                ++clipped;
                break;
            }
        }
    }

    const PinholeCamera cam(integral.center_pose.position, integral.fov, integral.width);
    const Vec3 p = cam.position();
    const double reach = p.z - dem.min_height();
    if (!(reach > 0.0)) return clipped;
    const double half = reach * cam.half_width() / cam.focal() + cell_;
    const int ix0 = std::max(0, static_cast<int>(std::floor((p.x - half - extent_.x0) / cell_)));
    const int ix1 = std::min(cols_ - 1, static_cast<int>(std::floor((p.x + half - extent_.x0) / cell_)));
    const int iy0 = std::max(0, static_cast<int>(std::floor((p.y - half - extent_.y0) / cell_)));
    const int iy1 = std::min(rows_ - 1, static_cast<int>(std::floor((p.y + half - extent_.y0) / cell_)));

    for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
            const double x = center_x(ix);
            const double y = center_y(iy);
            if (!dem.contains(x, y)) continue;
            const auto px = cam.project({x, y, dem.height_at(x, y)});
            if (!px || !(px->u >= 0 && px->u < integral.width && px->v >= 0 && px->v < integral.width)) continue;
            const int col = static_cast<int>(px->u);
            const int row = static_cast<int>(px->v);
            if (!integral.valid(col, row)) continue;
            double score = 0.0;
            for (const auto& d : detections) {
                if (d.box.contains(col, row)) score = std::max(score, d.score);
            }
            FusedCell& c = cells_[index(ix, iy)];
            if (c.finalized) continue;
            if (c.first_seen < 0) c.first_seen = integral_index;
            ++c.coverage;
            c.scores.push_back(score);
            if (static_cast<int>(c.scores.size()) > cap_) c.scores.erase(c.scores.begin());
        }
    }
    return clipped;
}

std::vector<CellDecision> ConfidenceMap::finalize(int current, double threshold, bool scan_ended) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in [0, 1]");
    std::vector<CellDecision> out;
    for (int iy = 0; iy < rows_; ++iy) {
        for (int ix = 0; ix < cols_; ++ix) {
            FusedCell& c = cells_[index(ix, iy)];
            if (c.finalized || c.first_seen < 0) continue;
            if (!scan_ended && current - c.first_seen < cap_) continue;
            c.finalized = true;
            c.partial = c.coverage < full_;
            CellDecision d;
            d.ix = ix;
            d.iy = iy;
            d.x = center_x(ix);
            d.y = center_y(iy);
            d.partial = c.partial;
            for (std::size_t m = 0; m < kMethods.size(); ++m) {
                c.value[m] = combine(c.scores, kMethods[m]);
                d.value[m] = c.value[m];
                d.positive[m] = c.value[m] >= threshold;
            }
            out.push_back(d);
        }
    }
    return out;
}

std::vector<double> ConfidenceMap::values(Method method) const {
    const auto m = static_cast<std::size_t>(method);
    std::vector<double> out(cells_.size(), 0.0);
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].finalized) out[i] = cells_[i].value[m];
    }
    return out;
}

}  // namespace synap

#include "synap/geometry.hpp"

#include <cmath>

#include "synap/common.hpp"

namespace synap {

PinholeCamera::PinholeCamera(Vec3 position, double fov_deg, int width)
    : position_(position), width_(width) {
    if (width <= 0) throw DomainError("image width must be positive");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw DomainError("fov must lie in (0, 180) degrees");
    focal_ = 0.5 * width / std::tan(deg_to_rad(fov_deg) / 2.0);
}

std::optional<PixelCoord> PinholeCamera::project(Vec3 world) const {
    const Vec3 d = world - position_;
    const auto& R = kRotation;
    const double xc = R[0] * d.x + R[1] * d.y + R[2] * d.z;
    const double yc = R[3] * d.x + R[4] * d.y + R[5] * d.z;
    const double zc = R[6] * d.x + R[7] * d.y + R[8] * d.z;
    if (!(zc > 0.0)) return std::nullopt;
    return PixelCoord{focal_ * xc / zc + half_width(), focal_ * yc / zc + half_width(), zc};
}

Vec3 PinholeCamera::ray_direction(double u, double v) const {
    const double xc = (u - half_width()) / focal_;
    const double yc = (v - half_width()) / focal_;
    // Transpose of kRotation applied to (xc, yc, 1).
    const auto& R = kRotation;
    return {R[0] * xc + R[3] * yc + R[6], R[1] * xc + R[4] * yc + R[7],
            R[2] * xc + R[5] * yc + R[8]};
}

double PinholeCamera::footprint_width(double distance) const {
    return distance * width_ / focal_;
}

}  // namespace synap

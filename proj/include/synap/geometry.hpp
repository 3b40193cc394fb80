#pragma once

#include <array>
#include <optional>

namespace synap {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Camera pose. The camera always looks straight down with image rows
/// pointing to world -y (north up), so a position and a timestamp suffice.
struct Pose {
    Vec3 position;
    double timestamp = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

struct PixelCoord {
    double u = 0;      // column, continuous; pixel i spans [i, i+1)
    double v = 0;      // row
    double depth = 0;  // distance along the optical axis
};

/// Square-image pinhole camera with a nadir orientation.
///
/// Camera frame: x = world +x, y = world -y, z (forward) = world -z.
class PinholeCamera {
public:
    PinholeCamera(Vec3 position, double fov_deg, int width);

    /// World-to-camera rotation, row-major.
    static constexpr std::array<double, 9> kRotation{1, 0, 0, 0, -1, 0, 0, 0, -1};

    Vec3 position() const { return position_; }
    int width() const { return width_; }
    double focal() const { return focal_; }
    double half_width() const { return 0.5 * width_; }

    /// Projects a world point; nullopt when it lies behind the camera.
    std::optional<PixelCoord> project(Vec3 world) const;
    /// Unnormalized ray direction (camera-z component 1) through image point (u, v).
    Vec3 ray_direction(double u, double v) const;
    /// Ground footprint width on a horizontal plane `distance` below the camera.
    double footprint_width(double distance) const;

private:
    Vec3 position_;
    int width_;
    double focal_;
};

}  // namespace synap

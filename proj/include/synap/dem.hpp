#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "synap/geometry.hpp"

namespace synap {

/// Digital elevation model: a regular grid of vertices triangulated into a
/// mesh (two triangles per cell, split along the (i,j)-(i+1,j+1) diagonal),
/// with one base intensity per cell.
class Dem {
public:
    Dem(double x0, double y0, double spacing, int nx, int ny, std::vector<double> heights,
        std::vector<float> cell_intensity);

    static Dem flat(double x0, double y0, double spacing, int nx, int ny, float intensity = 0.1f,
                    double height = 0.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double spacing() const { return spacing_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double x1() const { return x0_ + spacing_ * (nx_ - 1); }
    double y1() const { return y0_ + spacing_ * (ny_ - 1); }
    std::size_t vertex_count() const { return heights_.size(); }
    bool is_flat() const { return flat_; }
    double min_height() const { return min_z_; }
    double max_height() const { return max_z_; }

    Vec3 vertex(int i, int j) const {
        return {x0_ + spacing_ * i, y0_ + spacing_ * j, heights_[index(i, j)]};
    }
    const std::vector<double>& heights() const { return heights_; }
    const std::vector<float>& cell_intensities() const { return cell_intensity_; }

    bool contains(double x, double y) const {
        return x >= x0_ && x <= x1() && y >= y0_ && y <= y1();
    }
    /// Surface height on the triangulated mesh; requires contains(x, y).
    double height_at(double x, double y) const;
    float intensity_at(double x, double y) const;

    /// First intersection of origin + t * dir (t > 0) with the surface.
    std::optional<double> intersect(Vec3 origin, Vec3 dir) const;

    void set_height(int i, int j, double z);
    void set_cell_intensity(int i, int j, float value);

    /// Changes whenever the geometry changes; equal tokens imply equal meshes.
    std::uint64_t revision() const { return revision_; }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
    }
    void refresh_bounds();

    double x0_, y0_, spacing_;
    int nx_, ny_;
    std::vector<double> heights_;
    std::vector<float> cell_intensity_;
    bool flat_ = true;
    double min_z_ = 0, max_z_ = 0;
    std::uint64_t revision_;
};

}  // namespace synap

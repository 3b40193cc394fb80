#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "synap/detect.hpp"
#include "synap/dem.hpp"
#include "synap/integral.hpp"
#include "synap/scene.hpp"

namespace synap {

enum class Method { maximum, median, max_median };
inline constexpr std::array<Method, 3> kMethods{Method::maximum, Method::median, Method::max_median};
const char* method_name(Method m);

/// Throws DomainError on an empty list.
double combine(std::span<const double> scores, Method method);

/// Ground corners of a pixel box (outer pixel edges) on the DEM, in the
/// order (c0, r0), (c1+1, r0), (c1+1, r1+1), (c0, r1+1). Corners whose ray
/// misses the DEM are nullopt.
std::array<std::optional<Vec3>, 4> project_aabb_to_ground(const Aabb& box, const IntegralImage& integral,
                                                           const Dem& dem);

struct FusedCell {
    std::vector<double> scores;  // newest last, at most cap entries
    int coverage = 0;            // integrals whose footprint covered the cell
    int first_seen = -1;         // integral index of first coverage
    bool finalized = false;
    bool partial = false;
    std::array<double, 3> value{};  // combined value per method, set at finalization
};

struct CellDecision {
    int ix = 0, iy = 0;
    double x = 0, y = 0;  // cell centre
    std::array<double, 3> value{};
    std::array<bool, 3> positive{};
    bool partial = false;
};

/// DEM-aligned grid of score collections. Cells start empty (value zero).
class ConfidenceMap {
public:
    ConfidenceMap(Extent extent, double cell_size, double o_f);

    int cols() const { return cols_; }
    int rows() const { return rows_; }
    double cell_size() const { return cell_; }
    const Extent& extent() const { return extent_; }
    int cap() const { return cap_; }
    int ripe_after() const { return cap_; }
    int full_coverage() const { return full_; }
    double o_f() const { return o_f_; }

    const FusedCell& cell(int ix, int iy) const { return cells_[index(ix, iy)]; }
    double center_x(int ix) const { return extent_.x0 + (ix + 0.5) * cell_; }
    double center_y(int iy) const { return extent_.y0 + (iy + 0.5) * cell_; }

    /// Adds one integral's evidence: each cell inside the integral's valid
    /// footprint gains the highest score among detections whose box holds
    /// the cell's pixel, or 0. Returns the number of boxes whose ground
    /// projection was clipped by the map border.
    std::size_t project_detections(std::span<const Detection> detections, const IntegralImage& integral,
                                   const Dem& dem, int integral_index);

    /// Finalizes cells that are ripe at `current` (seen at least
    /// ceil(o_f) integrals ago, or any covered cell when the scan ended).
    std::vector<CellDecision> finalize(int current, double threshold, bool scan_ended);

    /// Finalized value per cell for one method; unfinalized cells are 0.
    std::vector<double> values(Method method) const;

private:
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(ix);
    }

    Extent extent_;
    double cell_;
    double o_f_;
    int cols_ = 0, rows_ = 0;
    int cap_ = 1;
    int full_ = 1;
    std::vector<FusedCell> cells_;
};

}  // namespace synap

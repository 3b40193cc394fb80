#pragma once

#include <vector>

#include "synap/integral.hpp"

namespace synap {

/// Inclusive pixel bounds.
struct Aabb {
    int c0 = 0, r0 = 0, c1 = 0, r1 = 0;

    int width() const { return c1 - c0 + 1; }
    int height() const { return r1 - r0 + 1; }
    bool contains(int col, int row) const { return col >= c0 && col <= c1 && row >= r0 && row <= r1; }
    bool overlaps(const Aabb& o) const { return c0 <= o.c1 && o.c0 <= c1 && r0 <= o.r1 && o.r0 <= r1; }
};

struct Detection {
    Aabb box;
    double score = 0;
    int area = 0;  // pixels in the component
};

/// Threshold-and-components stand-in for a person classifier.
struct DetectorConfig {
    double threshold = 0.35;
    int min_area = 4;
    int max_area = 0;  // larger components are not person-shaped; 0 keeps all
    double baseline = 0.10;  // ground intensity
    double person = 1.0;
};

/// 8-connected components of valid pixels at or above the threshold, one
/// detection per component of at least min_area (and at most max_area, if set) pixels, in raster order of
/// each component's first pixel.
std::vector<Detection> detect(const IntegralImage& integral, const DetectorConfig& config);

}  // namespace synap

#pragma once

// Data-parallel inner loops of the integral renderer.
//
// Every kernel has a scalar reference and, on x86-64, an AVX2 variant. The
// variants perform the same IEEE operations in the same order (no FMA), so
// their outputs are bit-identical; the dispatcher picks one at runtime.

#include <cstddef>
#include <cstdint>

namespace synap::simd {

/// Nadir pinhole camera reduced to what the kernels need.
struct CameraParams {
    double px = 0, py = 0, pz = 0;  // camera centre, world
    double focal = 0;               // pixels
    double half = 0;                // width / 2
    int width = 0;
};

/// Projects world points to screen space: u, v in pixels, w = depth along
/// the optical axis (w <= 0 means behind the camera).
using TransformFn = void (*)(const CameraParams& cam, const double* x, const double* y,
                             const double* z, std::size_t n, double* u, double* v, double* w);

/// For each world point (NaN z = no surface), projects it into the source
/// camera, samples `image` (width x width, nearest) and adds the sample to
/// sum[i] and 1 to count[i] when it lands inside the image.
using ProjectAccumulateFn = void (*)(const CameraParams& src, const double* x, const double* y,
                                     const double* z, std::size_t n, const std::uint16_t* image,
                                     std::uint32_t* sum, std::uint32_t* count);

/// One row of a rasterized grid cell made of two triangles. Edge k of the
/// cell is inside where ea[k] * x + ry[k] >= tol[k] at pixel centre x;
/// edges 0-2 bound triangle 0 and edges 3-5 triangle 1 (a disabled
/// triangle gets tol = +inf). Triangle 0 wins where both contain a pixel.
/// Along the pixel ray the surface lies at t = k / (nx * dir_x + nyd).
struct SpanSetup {
    double ea[6], ry[6], tol[6];
    double nx[2], nyd[2], k[2];
    double px, py, pz;  // camera centre
    double dy;          // world y component of the row's rays
};

/// Whole cell: per-row terms are ry[k] = eb[k] * cy + ec[k] and
/// nyd[k] = ny[k] * dy - nz[k], with cy the row's pixel-centre coordinate.
struct QuadSetup {
    SpanSetup span;
    double eb[6], ec[6];
    double ny[2], nz[2];
    int c0, c1, r0, r1;
};

/// Fills span.ry, span.nyd and span.dy for one row. Shared by all variants.
inline void prepare_row(QuadSetup& q, int row, const double* dir_y) {
    const double cy = row + 0.5;
    q.span.dy = dir_y[row];
    for (int k = 0; k < 6; ++k) q.span.ry[k] = q.eb[k] * cy + q.ec[k];
    for (int k = 0; k < 2; ++k) q.span.nyd[k] = q.ny[k] * q.span.dy - q.nz[k];
}

/// Depth-tested writes of the surface point for every pixel centre of the
/// cell. A point replaces the pixel when it lies higher than the z already
/// there (rays all point straight down), so z starts at -inf. Buffers are
/// row-major with `stride` pixels per row; dir_x / dir_y hold the world ray
/// components per column / row.
using RasterQuadFn = void (*)(QuadSetup& q, int stride, const double* dir_x, const double* dir_y,
                              double* x, double* y, double* z);

enum class Isa { scalar, avx2 };

namespace scalar {
void transform(const CameraParams&, const double*, const double*, const double*, std::size_t,
               double*, double*, double*);
void project_accumulate(const CameraParams&, const double*, const double*, const double*,
                        std::size_t, const std::uint16_t*, std::uint32_t*, std::uint32_t*);
void raster_span(const SpanSetup&, int, int, const double*, double*, double*, double*);
void raster_quad(QuadSetup&, int, const double*, const double*, double*, double*, double*);
}  // namespace scalar

#if defined(SYNAP_HAVE_AVX2)
namespace avx2 {
void transform(const CameraParams&, const double*, const double*, const double*, std::size_t,
               double*, double*, double*);
void project_accumulate(const CameraParams&, const double*, const double*, const double*,
                        std::size_t, const std::uint16_t*, std::uint32_t*, std::uint32_t*);
void raster_span(const SpanSetup&, int, int, const double*, double*, double*, double*);
void raster_quad(QuadSetup&, int, const double*, const double*, double*, double*, double*);
}  // namespace avx2
#endif

/// True when the AVX2 variants are compiled in and the CPU supports them.
bool avx2_available();

/// Active variant. Defaults to the best available; SYNAP_FORCE_SCALAR=1 in
/// the environment pins the scalar path.
Isa active_isa();
/// Overrides the active variant; requesting avx2 without support throws.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

void transform(const CameraParams& cam, const double* x, const double* y, const double* z,
               std::size_t n, double* u, double* v, double* w);
void project_accumulate(const CameraParams& src, const double* x, const double* y,
                        const double* z, std::size_t n, const std::uint16_t* image,
                        std::uint32_t* sum, std::uint32_t* count);
void raster_quad(QuadSetup& q, int stride, const double* dir_x, const double* dir_y, double* x, double* y,
                 double* z);

}  // namespace synap::simd

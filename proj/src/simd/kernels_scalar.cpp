#include "synap/simd/kernels.hpp"

namespace synap::simd::scalar {

// Camera frame of the nadir camera: xc = dx, yc = -dy, zc = -dz.

void transform(const CameraParams& cam, const double* x, const double* y, const double* z,
               std::size_t n, double* u, double* v, double* w) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xc = x[i] - cam.px;
        const double yc = -(y[i] - cam.py);
        const double zc = -(z[i] - cam.pz);
        u[i] = cam.focal * xc / zc + cam.half;
        v[i] = cam.focal * yc / zc + cam.half;
        w[i] = zc;
    }
}

void project_accumulate(const CameraParams& src, const double* x, const double* y,
                        const double* z, std::size_t n, const std::uint16_t* image,
                        std::uint32_t* sum, std::uint32_t* count) {
    const double size = src.width;
    for (std::size_t i = 0; i < n; ++i) {
        const double xc = x[i] - src.px;
        const double yc = -(y[i] - src.py);
        const double zc = -(z[i] - src.pz);
        if (!(zc > 0.0)) continue;
        const double u = src.focal * xc / zc + src.half;
        const double v = src.focal * yc / zc + src.half;
        if (!(u >= 0.0 && u < size && v >= 0.0 && v < size)) continue;
        const auto col = static_cast<std::size_t>(static_cast<int>(u));
        const auto row = static_cast<std::size_t>(static_cast<int>(v));
        sum[i] += image[row * static_cast<std::size_t>(src.width) + col];
        count[i] += 1;
    }
}

void raster_span(const SpanSetup& s, int c0, int c1, const double* dir_x, double* x, double* y, double* z) {
    for (int col = c0; col <= c1; ++col) {
        const double cx = col + 0.5;
        const bool in0 = s.ea[0] * cx + s.ry[0] >= s.tol[0] && s.ea[1] * cx + s.ry[1] >= s.tol[1] &&
                         s.ea[2] * cx + s.ry[2] >= s.tol[2];
        const bool in1 = s.ea[3] * cx + s.ry[3] >= s.tol[3] && s.ea[4] * cx + s.ry[4] >= s.tol[4] &&
                         s.ea[5] * cx + s.ry[5] >= s.tol[5];
        if (!in0 && !in1) continue;
        const int tri = in0 ? 0 : 1;
        const double dx = dir_x[col];
        const double denom = s.nx[tri] * dx + s.nyd[tri];
        const double t = s.k[tri] / denom;
        const double h = s.pz - t;
        if (!(denom != 0.0) || !(t > 0.0) || !(h > z[col])) continue;
        x[col] = s.px + t * dx;
        y[col] = s.py + t * s.dy;
        z[col] = h;
    }
}

void raster_quad(QuadSetup& q, int stride, const double* dir_x, const double* dir_y, double* x, double* y,
                 double* z) {
    for (int row = q.r0; row <= q.r1; ++row) {
        prepare_row(q, row, dir_y);
        const std::size_t base = static_cast<std::size_t>(row) * static_cast<std::size_t>(stride);
        raster_span(q.span, q.c0, q.c1, dir_x, x + base, y + base, z + base);
    }
}

}  // namespace synap::simd::scalar

#include <immintrin.h>

#include "synap/simd/kernels.hpp"

namespace synap::simd::avx2 {

void transform(const CameraParams& cam, const double* x, const double* y, const double* z,
               std::size_t n, double* u, double* v, double* w) {
    const __m256d px = _mm256_set1_pd(cam.px);
    const __m256d py = _mm256_set1_pd(cam.py);
    const __m256d pz = _mm256_set1_pd(cam.pz);
    const __m256d f = _mm256_set1_pd(cam.focal);
    const __m256d half = _mm256_set1_pd(cam.half);
    const __m256d sign = _mm256_set1_pd(-0.0);  // xor flips the sign bit, like scalar negation
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xc = _mm256_sub_pd(_mm256_loadu_pd(x + i), px);
        const __m256d yc = _mm256_xor_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(y + i), py));
        const __m256d zc = _mm256_xor_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(z + i), pz));
        _mm256_storeu_pd(u + i, _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(f, xc), zc), half));
        _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(f, yc), zc), half));
        _mm256_storeu_pd(w + i, zc);
    }
    if (i < n) scalar::transform(cam, x + i, y + i, z + i, n - i, u + i, v + i, w + i);
}

void project_accumulate(const CameraParams& src, const double* x, const double* y,
                        const double* z, std::size_t n, const std::uint16_t* image,
                        std::uint32_t* sum, std::uint32_t* count) {
    const __m256d px = _mm256_set1_pd(src.px);
    const __m256d py = _mm256_set1_pd(src.py);
    const __m256d pz = _mm256_set1_pd(src.pz);
    const __m256d f = _mm256_set1_pd(src.focal);
    const __m256d half = _mm256_set1_pd(src.half);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d size = _mm256_set1_pd(static_cast<double>(src.width));
    const __m128i width = _mm_set1_epi32(src.width);
    alignas(16) std::int32_t idx[4];

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xc = _mm256_sub_pd(_mm256_loadu_pd(x + i), px);
        const __m256d yc = _mm256_xor_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(y + i), py));
        const __m256d zc = _mm256_xor_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(z + i), pz));
        const __m256d u = _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(f, xc), zc), half);
        const __m256d v = _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(f, yc), zc), half);

        __m256d ok = _mm256_cmp_pd(zc, zero, _CMP_GT_OQ);
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, zero, _CMP_GE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, size, _CMP_LT_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, zero, _CMP_GE_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, size, _CMP_LT_OQ));
        const int mask = _mm256_movemask_pd(ok);
        if (mask == 0) continue;

        // Lanes that failed may hold garbage; they are never read back.
        const __m256d us = _mm256_blendv_pd(zero, u, ok);
        const __m256d vs = _mm256_blendv_pd(zero, v, ok);
        const __m128i col = _mm256_cvttpd_epi32(us);
        const __m128i row = _mm256_cvttpd_epi32(vs);
        _mm_store_si128(reinterpret_cast<__m128i*>(idx),
                        _mm_add_epi32(_mm_mullo_epi32(row, width), col));
        for (int lane = 0; lane < 4; ++lane) {
            if (mask & (1 << lane)) {
                sum[i + lane] += image[static_cast<std::size_t>(idx[lane])];
                count[i + lane] += 1;
            }
        }
    }
    if (i < n) scalar::project_accumulate(src, x + i, y + i, z + i, n - i, image, sum + i, count + i);
}

namespace {

// Row-invariant broadcasts of a cell, built once per cell.
struct QuadConsts {
    __m256d ea[6], tol[6];
    __m256d nx0, nx1, k0, k1, px, py, pz;

    explicit QuadConsts(const SpanSetup& s) {
        for (int k = 0; k < 6; ++k) {
            ea[k] = _mm256_set1_pd(s.ea[k]);
            tol[k] = _mm256_set1_pd(s.tol[k]);
        }
        nx0 = _mm256_set1_pd(s.nx[0]);
        nx1 = _mm256_set1_pd(s.nx[1]);
        k0 = _mm256_set1_pd(s.k[0]);
        k1 = _mm256_set1_pd(s.k[1]);
        px = _mm256_set1_pd(s.px);
        py = _mm256_set1_pd(s.py);
        pz = _mm256_set1_pd(s.pz);
    }
};

void span(const QuadConsts& q, const SpanSetup& s, int c0, int c1, const double* dir_x, double* x, double* y,
          double* z) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d zero = _mm256_setzero_pd();
    __m256d ry[6];
    for (int k = 0; k < 6; ++k) ry[k] = _mm256_set1_pd(s.ry[k]);
    auto inside = [&](__m256d cx, int k) {
        return _mm256_cmp_pd(_mm256_add_pd(_mm256_mul_pd(q.ea[k], cx), ry[k]), q.tol[k], _CMP_GE_OQ);
    };
    const __m256d nyd0 = _mm256_set1_pd(s.nyd[0]), nyd1 = _mm256_set1_pd(s.nyd[1]);
    const __m256d dy = _mm256_set1_pd(s.dy);
    const __m128i lane = _mm_setr_epi32(0, 1, 2, 3);
    const __m128i last = _mm_set1_epi32(c1);
    for (int col = c0; col <= c1; col += 4) {
        const __m128i cols = _mm_add_epi32(_mm_set1_epi32(col), lane);
        // Lanes past c1 are masked off; masked loads and stores never touch them.
        const __m256i live = _mm256_cvtepi32_epi64(_mm_xor_si128(_mm_cmpgt_epi32(cols, last), _mm_set1_epi32(-1)));
        const __m256d cx = _mm256_add_pd(_mm256_cvtepi32_pd(cols), half);
        const __m256d in0 = _mm256_and_pd(_mm256_and_pd(inside(cx, 0), inside(cx, 1)), inside(cx, 2));
        const __m256d in1 = _mm256_and_pd(_mm256_and_pd(inside(cx, 3), inside(cx, 4)), inside(cx, 5));
        const __m256d any = _mm256_and_pd(_mm256_or_pd(in0, in1), _mm256_castsi256_pd(live));
        if (_mm256_movemask_pd(any) == 0) continue;
        const __m256d nx = _mm256_blendv_pd(q.nx1, q.nx0, in0);
        const __m256d nyd = _mm256_blendv_pd(nyd1, nyd0, in0);
        const __m256d kk = _mm256_blendv_pd(q.k1, q.k0, in0);
        const __m256d dx = _mm256_maskload_pd(dir_x + col, live);
        const __m256d denom = _mm256_add_pd(_mm256_mul_pd(nx, dx), nyd);
        const __m256d t = _mm256_div_pd(kk, denom);
        const __m256d h = _mm256_sub_pd(q.pz, t);
        const __m256d old = _mm256_maskload_pd(z + col, live);
        __m256d ok = _mm256_and_pd(any, _mm256_cmp_pd(denom, zero, _CMP_NEQ_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, zero, _CMP_GT_OQ));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(h, old, _CMP_GT_OQ));
        if (_mm256_movemask_pd(ok) == 0) continue;
        const __m256i store = _mm256_castpd_si256(ok);
        _mm256_maskstore_pd(x + col, store, _mm256_add_pd(q.px, _mm256_mul_pd(t, dx)));
        _mm256_maskstore_pd(y + col, store, _mm256_add_pd(q.py, _mm256_mul_pd(t, dy)));
        _mm256_maskstore_pd(z + col, store, h);
    }
}

}  // namespace

void raster_span(const SpanSetup& s, int c0, int c1, const double* dir_x, double* x, double* y, double* z) {
    span(QuadConsts(s), s, c0, c1, dir_x, x, y, z);
}

void raster_quad(QuadSetup& q, int stride, const double* dir_x, const double* dir_y, double* x, double* y,
                 double* z) {
    const QuadConsts consts(q.span);
    for (int row = q.r0; row <= q.r1; ++row) {
        prepare_row(q, row, dir_y);
        const std::size_t base = static_cast<std::size_t>(row) * static_cast<std::size_t>(stride);
        span(consts, q.span, q.c0, q.c1, dir_x, x + base, y + base, z + base);
    }
}

}  // namespace synap::simd::avx2

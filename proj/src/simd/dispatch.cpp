#include <atomic>
#include <cstdlib>
#include <cstring>

#include "synap/common.hpp"
#include "synap/simd/kernels.hpp"

namespace synap::simd {

namespace {

Isa initial_isa() {
    const char* force = std::getenv("SYNAP_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0 && *force) return Isa::scalar;
    return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

bool avx2_available() {
#if defined(SYNAP_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_available()) throw DomainError("AVX2 kernels are not available");
    current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void transform(const CameraParams& cam, const double* x, const double* y, const double* z,
               std::size_t n, double* u, double* v, double* w) {
#if defined(SYNAP_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::transform(cam, x, y, z, n, u, v, w);
#endif
    scalar::transform(cam, x, y, z, n, u, v, w);
}

void project_accumulate(const CameraParams& src, const double* x, const double* y,
                        const double* z, std::size_t n, const std::uint16_t* image,
                        std::uint32_t* sum, std::uint32_t* count) {
#if defined(SYNAP_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        return avx2::project_accumulate(src, x, y, z, n, image, sum, count);
    }
#endif
    scalar::project_accumulate(src, x, y, z, n, image, sum, count);
}

void raster_quad(QuadSetup& q, int stride, const double* dir_x, const double* dir_y, double* x, double* y,
                 double* z) {
#if defined(SYNAP_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::raster_quad(q, stride, dir_x, dir_y, x, y, z);
#endif
    scalar::raster_quad(q, stride, dir_x, dir_y, x, y, z);
}

}  // namespace synap::simd

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "synap/bench.hpp"
#include "synap/common.hpp"
#include "synap/integral.hpp"
#include "synap/simd/kernels.hpp"

using namespace synap;

namespace {

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

// Exact bits, except that the sign and payload of a NaN are not compared.
bool same_bits_or_nan(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) && std::isnan(b[i])) continue;
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    }
    return true;
}

class IsaGuard {
public:
    IsaGuard() : saved_(simd::active_isa()) {}
    ~IsaGuard() { simd::set_isa(saved_); }

private:
    simd::Isa saved_;
};

#if defined(SYNAP_HAVE_AVX2)
#define REQUIRE_AVX2() \
    if (!simd::avx2_available()) GTEST_SKIP() << "CPU lacks AVX2"
#else
#define REQUIRE_AVX2() GTEST_SKIP() << "built without AVX2 kernels"
#endif

// Odd lengths exercise the vector tails.
constexpr std::size_t kPoints = 1003;

struct Points {
    std::vector<double> x, y, z;
};

Points random_points(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> xy(-30.0, 30.0), zz(-2.0, 40.0);
    Points p;
    for (std::size_t i = 0; i < kPoints; ++i) {
        p.x.push_back(xy(rng));
        p.y.push_back(xy(rng));
        // Some NaN surface points and some above the camera.
        p.z.push_back(i % 17 == 0 ? std::numeric_limits<double>::quiet_NaN() : zz(rng));
    }
    return p;
}

simd::CameraParams camera(std::mt19937_64& rng, int width) {
    std::uniform_real_distribution<double> off(-3.0, 3.0);
    const PinholeCamera cam({off(rng), off(rng), 35.0 + off(rng)}, 43.10, width);
    return {cam.position().x, cam.position().y, cam.position().z, cam.focal(), cam.half_width(), width};
}

}  // namespace

TEST(Simd, DispatchSelection) {
    IsaGuard guard;
    simd::set_isa(simd::Isa::scalar);
    EXPECT_EQ(simd::active_isa(), simd::Isa::scalar);
    EXPECT_STREQ(simd::isa_name(simd::Isa::scalar), "scalar");
    if (!simd::avx2_available()) { EXPECT_THROW(simd::set_isa(simd::Isa::avx2), DomainError); }
}

#if defined(SYNAP_HAVE_AVX2)

TEST(Simd, TransformBitIdentical) {
    REQUIRE_AVX2();
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = random_points(rng);
        const auto cam = camera(rng, 64 + trial);
        std::vector<double> u0(kPoints), v0(kPoints), w0(kPoints), u1(kPoints), v1(kPoints), w1(kPoints);
        simd::scalar::transform(cam, pts.x.data(), pts.y.data(), pts.z.data(), kPoints, u0.data(), v0.data(), w0.data());
        simd::avx2::transform(cam, pts.x.data(), pts.y.data(), pts.z.data(), kPoints, u1.data(), v1.data(), w1.data());
        EXPECT_TRUE(same_bits_or_nan(u0, u1));
        EXPECT_TRUE(same_bits_or_nan(v0, v1));
        EXPECT_TRUE(same_bits_or_nan(w0, w1));
    }
}

TEST(Simd, ProjectAccumulateBitIdentical) {
    REQUIRE_AVX2();
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pixel(0, 65535);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = random_points(rng);
        const int width = 32 + trial;
        const auto cam = camera(rng, width);
        std::vector<std::uint16_t> image(static_cast<std::size_t>(width) * width);
        for (auto& p : image) p = static_cast<std::uint16_t>(pixel(rng));
        std::vector<std::uint32_t> s0(kPoints, 7), c0(kPoints, 1), s1(kPoints, 7), c1(kPoints, 1);
        simd::scalar::project_accumulate(cam, pts.x.data(), pts.y.data(), pts.z.data(), kPoints, image.data(),
                                         s0.data(), c0.data());
        simd::avx2::project_accumulate(cam, pts.x.data(), pts.y.data(), pts.z.data(), kPoints, image.data(),
                                       s1.data(), c1.data());
        EXPECT_EQ(s0, s1);
        EXPECT_EQ(c0, c1);
    }
}

TEST(Simd, GeometryPassBitIdentical) {
    REQUIRE_AVX2();
    IsaGuard guard;
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> off(-4.0, 4.0);
    for (int trial = 0; trial < 8; ++trial) {
        const Dem dem = synthetic_dem(20'000 + 5'000 * trial, 0.2, 50 + trial);
        const Pose centre{{off(rng), off(rng), 30.0 + off(rng)}, 0};
        const int width = 61 + 10 * trial;
        simd::set_isa(simd::Isa::scalar);
        const auto a = build_geometry(dem, centre, 43.10, width);
        simd::set_isa(simd::Isa::avx2);
        const auto b = build_geometry(dem, centre, 43.10, width);
        EXPECT_TRUE(same_bits(a.x, b.x));
        EXPECT_TRUE(same_bits(a.y, b.y));
        EXPECT_TRUE(same_bits(a.z, b.z));
    }
}

TEST(Simd, IntegralBitIdentical) {
    REQUIRE_AVX2();
    IsaGuard guard;
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> pixel(0, 65535);
    const Dem dem = synthetic_dem(30'000, 0.2, 9);
    std::vector<SingleImage> frames(6);
    std::vector<const SingleImage*> ptrs;
    for (int k = 0; k < 6; ++k) {
        frames[k].width = 57;
        frames[k].pixels.resize(57 * 57);
        for (auto& p : frames[k].pixels) p = static_cast<std::uint16_t>(pixel(rng));
        frames[k].pose.position = {-2.5 + k, 0.3 * k, 35};
        ptrs.push_back(&frames[k]);
    }
    simd::set_isa(simd::Isa::scalar);
    const auto a = integrate_classical(ptrs, dem, {{0, 0, 35}, 0}, 43.10);
    simd::set_isa(simd::Isa::avx2);
    const auto b = integrate_classical(ptrs, dem, {{0, 0, 35}, 0}, 43.10);
    EXPECT_TRUE(same_bits(a.pixels, b.pixels));
    EXPECT_EQ(a.count, b.count);
}

#endif

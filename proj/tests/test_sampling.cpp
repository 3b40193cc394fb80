#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "synap/common.hpp"
#include "synap/sampling.hpp"

using namespace synap;

namespace {

FlightParams at_speed(double v_f) {
    FlightParams p;
    p.v_f = v_f;
    return p;
}

// Within +-1% of a rounded published value.
void expect_near_rel(double actual, double expected, double rel = 0.01) {
    EXPECT_NEAR(actual, expected, std::abs(expected) * rel) << "expected about " << expected;
}

}  // namespace

TEST(Sampling, OperatingPointTable) {
    struct Row {
        double v_f, d_f, o_f, t_f, e_cm;
    };
    // t_f at 6 m/s is published as 4.63; c_f / v_f gives 4.6.
    const Row rows[] = {
        {1, 0.5, 55.2, 27.6, 1.67},
        {4, 2, 13.8, 6.9, 6.67},
        {6, 3, 9.2, 4.6, 10},
        {10, 5, 5.52, 2.76, 16.67},
    };
    for (const auto& r : rows) {
        const SamplingPlan plan = make_plan(at_speed(r.v_f));
        SCOPED_TRACE(r.v_f);
        expect_near_rel(plan.d_f, r.d_f);
        expect_near_rel(plan.c_f, 27.6);
        expect_near_rel(plan.o_f, r.o_f);
        expect_near_rel(plan.t_f, r.t_f);
        expect_near_rel(plan.e_i_max * 100.0, r.e_cm);
        EXPECT_EQ(plan.n, 30);
    }
    expect_near_rel(altitude_scaled_spacing(1.0, 35.0, 1000.0), 28.57);
}

TEST(Sampling, FormulasMatchDirectEvaluation) {
    const double c_f = 2.0 * 35.0 * std::tan(43.10 / 2.0 * std::numbers::pi / 180.0);
    EXPECT_DOUBLE_EQ(ground_coverage(35.0, 43.10), c_f);
    EXPECT_DOUBLE_EQ(integral_spacing(6.0, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(overlap_factor(c_f, 3.0), c_f / 3.0);
    EXPECT_DOUBLE_EQ(integration_time(c_f, 6.0), c_f / 6.0);
    EXPECT_DOUBLE_EQ(interpolation_error(6.0, 1.0 / 30.0), 0.1);
    EXPECT_EQ(sampling_density(27.6, 0.92), 30);
    EXPECT_EQ(sampling_density(27.6, 27.6), 1);
    EXPECT_EQ(sampling_density(1.0, 5.0), 1);
}

TEST(Sampling, WarningsAtOverlapBoundary) {
    const SamplingPlan fast = make_plan(at_speed(30));
    EXPECT_NEAR(fast.o_f, 1.84, 0.01);
    EXPECT_FALSE(fast.gap_warning);
    const SamplingPlan faster = make_plan(at_speed(60));
    EXPECT_NEAR(faster.o_f, 0.92, 0.01);
    EXPECT_TRUE(faster.gap_warning);

    // d_f = 0.5 m < d_i = 0.92 m
    EXPECT_TRUE(make_plan(at_speed(1)).stale_warning);
    EXPECT_FALSE(make_plan(at_speed(4)).stale_warning);
}

TEST(Sampling, DegenerateSpacingGivesOneImage) {
    FlightParams p;
    p.d_i = ground_coverage(p.h, p.fov);
    EXPECT_EQ(make_plan(p).n, 1);
}

TEST(Sampling, RejectsInvalidParams) {
    auto with = [](auto mutate) {
        FlightParams p;
        mutate(p);
        return p;
    };
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.v_f = 0; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.t_p = -1; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.t_i = 0; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.h = 0; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.fov = 180; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.fov = 0; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.d_i = 0; })), DomainError);
    EXPECT_THROW(make_plan(with([](FlightParams& p) { p.v_f = std::nan(""); })), DomainError);
    EXPECT_THROW(altitude_scaled_spacing(1, 0, 10), DomainError);
}

TEST(SamplingProperty, MonotoneInSpeedAndProcessingTime) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(0.1, 50.0), t(0.05, 5.0);
    for (int i = 0; i < 1000; ++i) {
        FlightParams a;
        a.v_f = v(rng);
        a.t_p = t(rng);
        FlightParams b = a;
        b.v_f = a.v_f * 1.01;
        FlightParams c = a;
        c.t_p = a.t_p * 1.01;
        const auto pa = make_plan(a), pb = make_plan(b), pc = make_plan(c);
        EXPECT_LT(pa.d_f, pb.d_f);
        EXPECT_LT(pa.d_f, pc.d_f);
        EXPECT_GT(pa.o_f, pb.o_f);
    }
}

TEST(SamplingProperty, AltitudeScaling) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> h(5.0, 500.0), k(1.1, 4.0);
    for (int i = 0; i < 1000; ++i) {
        FlightParams a;
        a.h = h(rng);
        FlightParams b = a;
        const double s = k(rng);
        b.h = a.h * s;
        const auto pa = make_plan(a), pb = make_plan(b);
        EXPECT_NEAR(pb.c_f / pa.c_f, s, 1e-12 * s);
        EXPECT_NEAR(pb.t_f / pa.t_f, s, 1e-12 * s);
        EXPECT_NEAR(pb.o_f / pa.o_f, s, 1e-12 * s);
        // Scanning a fixed distance takes distance / v_f at any altitude; the
        // plan only changes how long each point stays in view.
        EXPECT_DOUBLE_EQ(pa.d_f, pb.d_f);
        // With d_i scaled alongside h, N is unchanged.
        b.d_i = altitude_scaled_spacing(a.d_i, a.h, b.h);
        EXPECT_EQ(make_plan(b).n, pa.n);
    }
}

TEST(SamplingProperty, OverlapTimesSpacingIsCoverage) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> v(0.1, 50.0), h(5.0, 500.0), fov(1.0, 170.0);
    for (int i = 0; i < 1000; ++i) {
        FlightParams p;
        p.v_f = v(rng);
        p.h = h(rng);
        p.fov = fov(rng);
        const auto plan = make_plan(p);
        EXPECT_NEAR(plan.o_f * plan.d_f, plan.c_f, 1e-12 * plan.c_f);
        EXPECT_EQ(plan.gap_warning, plan.o_f < 1.0);
        EXPECT_EQ(plan.stale_warning, plan.d_f < p.d_i);
        EXPECT_GE(plan.e_i_max, 0.0);
    }
}

TEST(SamplingProperty, AltitudeRoundTrip) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> d(0.01, 100.0), h(1.0, 2000.0);
    for (int i = 0; i < 1000; ++i) {
        const double di = d(rng), h1 = h(rng), h2 = h(rng);
        const double back = altitude_scaled_spacing(altitude_scaled_spacing(di, h1, h2), h2, h1);
        EXPECT_NEAR(back, di, 1e-12 * di);
    }
}

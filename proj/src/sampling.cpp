#include "synap/sampling.hpp"

#include <cmath>

#include "synap/common.hpp"

namespace synap {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

void FlightParams::validate() const {
    require_positive(v_f, "v_f");
    require_positive(t_p, "t_p");
    require_positive(t_i, "t_i");
    require_positive(h, "h");
    require_positive(d_i, "d_i");
    if (!(fov > 0.0 && fov < 180.0)) throw DomainError("fov must lie in (0, 180) degrees");
}

double integral_spacing(double v_f, double t_p) {
    require_positive(v_f, "v_f");
    require_positive(t_p, "t_p");
    return v_f * t_p;
}

double ground_coverage(double h, double fov_deg) {
    require_positive(h, "h");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw DomainError("fov must lie in (0, 180) degrees");
    return 2.0 * h * std::tan(deg_to_rad(fov_deg) / 2.0);
}

double overlap_factor(double c_f, double d_f) {
    require_positive(c_f, "c_f");
    require_positive(d_f, "d_f");
    return c_f / d_f;
}

int sampling_density(double c_f, double d_i) {
    require_positive(c_f, "c_f");
    require_positive(d_i, "d_i");
    // The relative nudge keeps exact ratios such as 27.6 / 0.92 from flooring
    // to 29 through representation error.
    const double ratio = c_f / d_i;
    const auto n = static_cast<int>(std::floor(ratio * (1.0 + 1e-12)));
    return n < 1 ? 1 : n;
}

double integration_time(double c_f, double v_f) {
    require_positive(c_f, "c_f");
    require_positive(v_f, "v_f");
    return c_f / v_f;
}

double altitude_scaled_spacing(double d_i1, double h1, double h2) {
    require_positive(d_i1, "d_i1");
    require_positive(h1, "h1");
    require_positive(h2, "h2");
    return d_i1 * h2 / h1;
}

double interpolation_error(double v_f, double t_i) {
    if (!(v_f >= 0.0) || !std::isfinite(v_f)) throw DomainError("v_f must be non-negative");
    require_positive(t_i, "t_i");
    return v_f * t_i / 2.0;
}

SamplingPlan make_plan(const FlightParams& params) {
    params.validate();
    SamplingPlan plan;
    plan.d_f = integral_spacing(params.v_f, params.t_p);
    plan.c_f = ground_coverage(params.h, params.fov);
    plan.o_f = overlap_factor(plan.c_f, plan.d_f);
    plan.n = sampling_density(plan.c_f, params.d_i);
    plan.t_f = integration_time(plan.c_f, params.v_f);
    plan.e_i_max = interpolation_error(params.v_f, params.t_i);
    plan.gap_warning = plan.o_f < 1.0;
    plan.stale_warning = plan.d_f < params.d_i;
    return plan;
}

}  // namespace synap

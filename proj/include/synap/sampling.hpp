#pragma once

// Continuous 1D synthetic-aperture sampling arithmetic.
//
// Lengths are metres, times seconds, angles degrees at the interface.

namespace synap {

struct FlightParams {
    double v_f = 4.0;          // flying speed, m/s
    double t_p = 0.5;          // processing time per integral, s
    double t_i = 1.0 / 30.0;   // imaging time per video frame, s
    double h = 35.0;           // altitude above ground, m
    double fov = 43.10;        // full field of view, degrees
    double d_i = 0.92;         // single-image sampling distance, m

    /// Throws DomainError if any invariant is violated.
    void validate() const;
};

struct SamplingPlan {
    double d_f = 0;      // integral spacing, m
    double c_f = 0;      // ground coverage of one integral, m
    double o_f = 0;      // overlap factor
    int n = 0;           // single images per integral (D_f = N)
    double t_f = 0;      // integration time, s
    double e_i_max = 0;  // max pose interpolation error, m

    bool gap_warning = false;    // o_f < 1: ground between integrals is never imaged
    bool stale_warning = false;  // d_f < d_i: consecutive integrals are identical
};

double integral_spacing(double v_f, double t_p);
double ground_coverage(double h, double fov_deg);
double overlap_factor(double c_f, double d_f);
/// c_f / d_i floored, never below one image.
int sampling_density(double c_f, double d_i);
double integration_time(double c_f, double v_f);
/// Sampling distance at altitude h2 that keeps the image disparity obtained
/// with d_i1 at altitude h1.
double altitude_scaled_spacing(double d_i1, double h1, double h2);
/// Worst-case position error from an unknown capture delay within one frame.
/// Independent of the GPS fix rate for constant-speed flight.
double interpolation_error(double v_f, double t_i);

SamplingPlan make_plan(const FlightParams& params);

}  // namespace synap

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mmck {

// Interval type-II Gaussian membership function, uncertain deviation:
// lower grade uses sigma_lower, upper grade uses sigma_upper.
struct It2Gaussian {
    double center = 0.0;
    double sigma_lower = 1.0;
    double sigma_upper = 1.0;
};

struct Grade {
    double lower = 0.0;
    double upper = 0.0;
};

Grade grade(const It2Gaussian& mf, double x);

// Two-input zeroth-order Sugeno engine with a full grid rule base.
// Rule j = i0 * mfs[1].size() + i1 pairs MF i0 of input 0 with MF i1 of input 1.
// Immutable during inference; safe for concurrent use.
struct It2Fis {
    std::array<std::vector<It2Gaussian>, 2> input_mfs; // inputs: e, de/dt
    std::vector<double> theta_kp;                      // consequent centers, length m
    std::vector<double> theta_ki;                      // consequent centers, length m
    double blend_m = 0.5;                              // in [0, 1]
    std::array<double, 2> input_scales{1.0, 1.0};

    std::size_t rule_count() const { return input_mfs[0].size() * input_mfs[1].size(); }
    void validate() const; // throws config_error on broken invariants
};

struct FiringStrengths {
    std::vector<double> xi_upper; // each sums to 1
    std::vector<double> xi_lower;
    bool underflow = false; // uniform fallback was taken
};

FiringStrengths firing_strengths(const It2Fis& fis, double x0, double x1);

// blend_m * theta' xi_U + (1 - blend_m) * theta' xi_L, clamped to [min theta, max theta].
double infer(const It2Fis& fis, double x0, double x1, std::span<const double> theta);

struct ScheduledGains {
    double kp = 0.0;
    double ki = 0.0;
};

// Scales (e, de) into the [-1, 1] universe with saturation, then infers both gains.
ScheduledGains schedule_gains(const It2Fis& fis, double e, double de);

// Builds the default 3x3 rule base: centers {-1, 0, 1}, sigma_U = 0.6,
// sigma_L = 0.36, constant consequents (kp0, ki0), blend_m = 0.5.
It2Fis make_default_fis(double kp0, double ki0, double e_scale, double de_scale);

} // namespace mmck

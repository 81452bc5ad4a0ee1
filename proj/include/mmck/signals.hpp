#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mmck {

using Abc = std::array<double, 3>;

struct Dq {
    double d = 0.0;
    double q = 0.0;
};

// Amplitude-invariant Park transform, q axis lagging d by 90 degrees:
// a balanced cosine set of peak A aligned with theta maps to (A, 0).
Dq abc_to_dq(const Abc& x, double theta);
Abc dq_to_abc(const Dq& x, double theta);

// i_d_ref = (2/3) p_ref / v_d, i_q_ref = -(2/3) q_ref / v_d.
// Throws config_error when |v_d| < v_min.
Dq power_to_current_refs(double p_ref, double q_ref, double v_d, double v_min = 1.0);

struct ThdReport {
    double fundamental_amplitude = 0.0;
    std::vector<double> harmonic_amplitudes; // orders 2..H, index 0 is order 2
    double thd = 0.0;                        // dimensionless ratio
    double f0 = 0.0;                         // Hz
};

// Harmonic amplitudes at exact bins of the largest whole-period window ending
// at the last sample. Requires >= 2 whole fundamental periods.
ThdReport thd(std::span<const double> samples, double sample_rate, double f0,
              int max_harmonic = 50);

} // namespace mmck

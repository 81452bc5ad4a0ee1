#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mmck {

// Band-limited rational approximation of s^alpha (Oustaloup recursive design).
// Immutable after design; safe to share across threads.
struct FracOperator {
    double alpha = 0.0;         // fractional exponent, |alpha| < 2
    int n_filter = 1;           // half-order N_f; total order 2*N_f+1
    double omega_b = 0.0;       // low band edge [rad/s]
    double omega_h = 0.0;       // high band edge [rad/s]
    std::vector<double> zeros;  // omega'_k, ascending in k
    std::vector<double> poles;  // omega_k, ascending in k
    double gain = 1.0;          // K = omega_h^alpha
};

// One bilinear-discretized first-order section (s+z)/(s+p), transposed DF-II.
struct FracSection {
    double b0 = 1.0;
    double b1 = 0.0;
    double a1 = 0.0;
    double w = 0.0; // single state
};

// Discrete cascade realization of a FracOperator. Mutable per-controller state;
// single-writer, distinct instances may run on distinct threads.
struct FracRealization {
    std::vector<FracSection> sections; // ascending-k order
    double input_gain = 1.0;           // K applied once at the cascade input
    double dt = 0.0;

    void reset();
};

FracOperator design_oustaloup(double alpha, int n_filter, double omega_b, double omega_h);

// Evaluates K * prod (jw + z_k)/(jw + p_k).
std::complex<double> frequency_response(const FracOperator& op, double omega);

// Bilinear map per section, cascaded in ascending-k order. Warns on stderr when
// dt*omega_h >= 2 (band top folds past Nyquist).
FracRealization discretize(const FracOperator& op, double dt);

// Advances the cascade by one sample. Throws simulation_fault on non-finite input.
double step_filter(FracRealization& real, double u);

} // namespace mmck

#pragma once

#include "mmck/simkit.hpp"
#include "mmck/woa.hpp"

#include <vector>

namespace mmck {

// Flat candidate encodings:
//   FOPI  (6):  kp_d, ki_d, alpha_d, kp_q, ki_q, alpha_q
//   FOFPI (38): per input (e then de), per MF ascending: center, sigma_L, sigma_U
//               (2*3*3 = 18), theta_kp (9), theta_ki (9), blend_m, alpha
// The FOFPI FIS parameter set is shared by both axes (independent instances).
inline constexpr std::size_t kFopiDim = 6;
inline constexpr std::size_t kFofpiDim = 38;

struct TuningSpec {
    ControllerKind target = ControllerKind::fopi;
    std::vector<Scenario> scenarios;  // controller blocks are overwritten per candidate
    double i_nominal = 10.0;          // A, instability threshold is 10x this
    double track_tol = 0.05;          // relative steady-state tracking band
    double track_weight = 10.0;       // penalty weight outside the band
};

struct DecodedCandidate {
    FopiParams fopi_d;
    FopiParams fopi_q;
    std::optional<It2Fis> fis; // FOFPI only, same parameters on both axes
    double repair_penalty = 0.0;
};

std::vector<std::pair<double, double>> default_bounds(ControllerKind target);

// Repairs sigma_L > sigma_U by swapping (with penalty); clamps blend to [0, 1].
DecodedCandidate decode_candidate(const std::vector<double>& x, ControllerKind target,
                                  double e_scale, double de_scale);

// Collapses a tuned FOPI vector into the equivalent constant-consequent FOFPI
// vector (d-axis gains on both axes); used to warm-start FOFPI tuning.
std::vector<double> fofpi_vector_from_fopi(const std::vector<double>& fopi_vec,
                                           double blend_m = 0.5);

// Applies the decoded candidate to a copy of the scenario.
Scenario apply_candidate(const Scenario& base, const DecodedCandidate& cand,
                         ControllerKind target);

// Mean steady-state line-line THD across the spec's scenarios plus finite
// penalties for divergence, degenerate output, repairs, and tracking violation.
double evaluate_candidate(const std::vector<double>& x, const TuningSpec& spec);

} // namespace mmck

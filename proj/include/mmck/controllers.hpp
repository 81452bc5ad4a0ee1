#pragma once

#include "mmck/fracorder.hpp"
#include "mmck/it2fis.hpp"

#include <optional>

namespace mmck {

struct FopiParams {
    double kp = 0.0;    // V/A
    double ki = 0.0;    // V/(A s^alpha)
    double alpha = 1.0; // fractional integral order, in (0, 2)
};

// Per-axis PI state with a band-limited fractional integrator. Single-writer;
// independent instances run on independent threads.
class Controller {
public:
    // FOPI: fixed gains. FOFPI: gains scheduled by the FIS each step.
    Controller(FopiParams params, const FracOperator& integrator_design, double dt,
               double u_max, std::optional<It2Fis> fis = std::nullopt,
               double tau_d_factor = 10.0);

    double step(double e, double dt);
    void reset();

    bool has_fis() const { return fis_.has_value(); }
    double last_kp() const { return last_kp_; }
    double last_ki() const { return last_ki_; }
    double u_max() const { return u_max_; }

private:
    double pi_core(double kp, double ki, double e);

    FopiParams params_;
    FracRealization integrator_; // realization of s^-alpha
    std::optional<It2Fis> fis_;
    double u_max_;
    double tau_d_;
    double prev_error_ = 0.0;
    double de_filtered_ = 0.0;
    int sat_sign_ = 0; // -1/0/+1, saturation state after the previous step
    bool first_step_ = true;
    double last_kp_ = 0.0;
    double last_ki_ = 0.0;
};

// Convenience: integrator realization for order alpha (designs s^-alpha over
// the given band and discretizes at dt).
FracRealization make_fractional_integrator(double alpha, int n_filter, double omega_b,
                                           double omega_h, double dt);

} // namespace mmck

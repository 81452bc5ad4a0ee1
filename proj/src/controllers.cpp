#include "mmck/controllers.hpp"

#include "mmck/errors.hpp"

#include <cmath>

namespace mmck {

FracRealization make_fractional_integrator(double alpha, int n_filter, double omega_b,
                                           double omega_h, double dt) {
    return discretize(design_oustaloup(-alpha, n_filter, omega_b, omega_h), dt);
}

Controller::Controller(FopiParams params, const FracOperator& integrator_design, double dt,
                       double u_max, std::optional<It2Fis> fis, double tau_d_factor)
    : params_(params),
      integrator_(discretize(integrator_design, dt)),
      fis_(std::move(fis)),
      u_max_(u_max),
      tau_d_(tau_d_factor * dt) {
    if (!(params_.alpha > 0.0 && params_.alpha < 2.0))
        throw config_error("Controller: integral order alpha must lie in (0, 2)");
    if (!(params_.kp >= 0.0) || !(params_.ki >= 0.0))
        throw config_error("Controller: gains must be >= 0");
    if (!(u_max_ > 0.0))
        throw config_error("Controller: u_max must be > 0");
    if (fis_) fis_->validate();
    last_kp_ = params_.kp;
    last_ki_ = params_.ki;
}

void Controller::reset() {
    integrator_.reset();
    prev_error_ = 0.0;
    de_filtered_ = 0.0;
    sat_sign_ = 0;
    first_step_ = true;
    last_kp_ = params_.kp;
    last_ki_ = params_.ki;
}

double Controller::pi_core(double kp, double ki, double e) {
    // Conditional integration: hold the integrator while saturated and the
    // error keeps pushing into the same rail.
    const bool frozen = (sat_sign_ > 0 && e > 0.0) || (sat_sign_ < 0 && e < 0.0);
    const double i_out = step_filter(integrator_, frozen ? 0.0 : e);
    const double u_raw = kp * e + ki * i_out;
    last_kp_ = kp;
    last_ki_ = ki;
    if (u_raw > u_max_) {
        sat_sign_ = 1;
        return u_max_;
    }
    if (u_raw < -u_max_) {
        sat_sign_ = -1;
        return -u_max_;
    }
    sat_sign_ = 0;
    return u_raw;
}

double Controller::step(double e, double dt) {
    if (!std::isfinite(e))
        throw simulation_fault("Controller::step: non-finite error sample", 0.0);
    if (!(dt > 0.0))
        throw config_error("Controller::step: dt must be > 0");

    if (!fis_)
        return pi_core(params_.kp, params_.ki, e);

    const double de_raw = first_step_ ? 0.0 : (e - prev_error_) / dt;
    first_step_ = false;
    de_filtered_ += dt / (tau_d_ + dt) * (de_raw - de_filtered_);
    prev_error_ = e;

    const ScheduledGains g = schedule_gains(*fis_, e, de_filtered_);
    return pi_core(g.kp, g.ki, e);
}

} // namespace mmck

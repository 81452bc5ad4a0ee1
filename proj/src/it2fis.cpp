#include "mmck/it2fis.hpp"

#include "mmck/errors.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace mmck {

Grade grade(const It2Gaussian& mf, double x) {
    const double du = (x - mf.center) / mf.sigma_upper;
    const double dl = (x - mf.center) / mf.sigma_lower;
    return {std::exp(-0.5 * dl * dl), std::exp(-0.5 * du * du)};
}

void It2Fis::validate() const {
    const std::size_t m = rule_count();
    if (m == 0)
        throw config_error("It2Fis: each input needs at least one MF");
    for (const auto& mfs : input_mfs)
        for (const auto& mf : mfs) {
            if (!(mf.sigma_lower > 0.0) || !(mf.sigma_upper >= mf.sigma_lower))
                throw config_error("It2Fis: need 0 < sigma_lower <= sigma_upper");
        }
    if (theta_kp.size() != m || theta_ki.size() != m)
        throw config_error("It2Fis: theta length must equal the rule count");
    for (double v : theta_kp)
        if (!(v >= 0.0)) throw config_error("It2Fis: theta_kp entries must be >= 0");
    for (double v : theta_ki)
        if (!(v >= 0.0)) throw config_error("It2Fis: theta_ki entries must be >= 0");
    if (!(blend_m >= 0.0 && blend_m <= 1.0))
        throw config_error("It2Fis: blend_m must lie in [0, 1]");
}

namespace {

void normalize_or_uniform(std::vector<double>& w, bool& underflow) {
    double sum = 0.0;
    for (double v : w) sum += v;
    if (sum < DBL_MIN) {
        underflow = true;
        const double u = 1.0 / static_cast<double>(w.size());
        std::fill(w.begin(), w.end(), u);
        return;
    }
    for (double& v : w) v /= sum;
}

} // namespace

FiringStrengths firing_strengths(const It2Fis& fis, double x0, double x1) {
    const auto& mfs0 = fis.input_mfs[0];
    const auto& mfs1 = fis.input_mfs[1];
    FiringStrengths out;
    out.xi_upper.reserve(fis.rule_count());
    out.xi_lower.reserve(fis.rule_count());
    for (const auto& a : mfs0) {
        const Grade g0 = grade(a, x0);
        for (const auto& b : mfs1) {
            const Grade g1 = grade(b, x1);
            out.xi_upper.push_back(g0.upper * g1.upper);
            out.xi_lower.push_back(g0.lower * g1.lower);
        }
    }
    normalize_or_uniform(out.xi_upper, out.underflow);
    normalize_or_uniform(out.xi_lower, out.underflow);
    return out;
}

namespace {

// theta' xi written as theta[0] + sum xi_j (theta_j - theta[0]) so that a
// constant theta vector reproduces its value exactly.
double anchored_dot(std::span<const double> theta, const std::vector<double>& xi) {
    double acc = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j)
        acc += xi[j] * (theta[j] - theta[0]);
    return theta[0] + acc;
}

} // namespace

double infer(const It2Fis& fis, double x0, double x1, std::span<const double> theta) {
    if (theta.size() != fis.rule_count())
        throw config_error("infer: theta length mismatch");
    const FiringStrengths xi = firing_strengths(fis, x0, x1);
    const double y_upper = anchored_dot(theta, xi.xi_upper);
    double y = y_upper;
    if (fis.blend_m != 1.0) {
        const double y_lower = anchored_dot(theta, xi.xi_lower);
        y = y_lower + fis.blend_m * (y_upper - y_lower);
    }
    const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
    return std::clamp(y, *lo, *hi);
}

ScheduledGains schedule_gains(const It2Fis& fis, double e, double de) {
    const double x0 = std::clamp(e * fis.input_scales[0], -1.0, 1.0);
    const double x1 = std::clamp(de * fis.input_scales[1], -1.0, 1.0);
    return {infer(fis, x0, x1, fis.theta_kp), infer(fis, x0, x1, fis.theta_ki)};
}

It2Fis make_default_fis(double kp0, double ki0, double e_scale, double de_scale) {
    It2Fis fis;
    for (auto& mfs : fis.input_mfs)
        mfs = {{-1.0, 0.36, 0.6}, {0.0, 0.36, 0.6}, {1.0, 0.36, 0.6}};
    fis.theta_kp.assign(9, kp0);
    fis.theta_ki.assign(9, ki0);
    fis.blend_m = 0.5;
    fis.input_scales = {e_scale, de_scale};
    return fis;
}

} // namespace mmck

#include "mmck/tuning.hpp"

#include "mmck/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mmck {

std::vector<std::pair<double, double>> default_bounds(ControllerKind target) {
    const std::pair<double, double> kp{0.0, 50.0};
    const std::pair<double, double> ki{0.0, 500.0};
    const std::pair<double, double> alpha{0.1, 1.5};
    if (target == ControllerKind::fopi)
        return {kp, ki, alpha, kp, ki, alpha};

    std::vector<std::pair<double, double>> b;
    for (int input = 0; input < 2; ++input) {
        for (int mf = 0; mf < 3; ++mf) {
            b.emplace_back(-1.2, 1.2);  // center
            b.emplace_back(0.05, 1.5);  // sigma_L
            b.emplace_back(0.05, 1.5);  // sigma_U
        }
    }
    for (int j = 0; j < 9; ++j) b.push_back(kp);
    for (int j = 0; j < 9; ++j) b.push_back(ki);
    b.emplace_back(0.0, 1.0); // blend_m
    b.push_back(alpha);
    return b;
}

namespace {

double fis_mean(const It2Fis& fis, bool kp) {
    const auto& th = kp ? fis.theta_kp : fis.theta_ki;
    double s = 0.0;
    for (double v : th) s += v;
    return s / static_cast<double>(th.size());
}

} // namespace

DecodedCandidate decode_candidate(const std::vector<double>& x, ControllerKind target,
                                  double e_scale, double de_scale) {
    DecodedCandidate cand;
    if (target == ControllerKind::fopi) {
        if (x.size() != kFopiDim) throw config_error("decode_candidate: FOPI vector must be 6-dim");
        cand.fopi_d = {x[0], x[1], x[2]};
        cand.fopi_q = {x[3], x[4], x[5]};
        return cand;
    }

    if (x.size() != kFofpiDim)
        throw config_error("decode_candidate: FOFPI vector must be 38-dim");
    It2Fis fis;
    std::size_t k = 0;
    for (int input = 0; input < 2; ++input) {
        for (int mf = 0; mf < 3; ++mf) {
            It2Gaussian g;
            g.center = x[k++];
            g.sigma_lower = x[k++];
            g.sigma_upper = x[k++];
            if (g.sigma_lower > g.sigma_upper) {
                std::swap(g.sigma_lower, g.sigma_upper);
                cand.repair_penalty += 1.0;
            }
            fis.input_mfs[input].push_back(g);
        }
    }
    fis.theta_kp.assign(x.begin() + k, x.begin() + k + 9);
    k += 9;
    fis.theta_ki.assign(x.begin() + k, x.begin() + k + 9);
    k += 9;
    fis.blend_m = std::clamp(x[k++], 0.0, 1.0);
    const double alpha = x[k++];
    fis.input_scales = {e_scale, de_scale};
    fis.validate();
    // priming gains feed the controller validator; the FIS overrides them every step
    cand.fopi_d = {fis_mean(fis, true), fis_mean(fis, false), alpha};
    cand.fopi_q = cand.fopi_d;
    cand.fis = std::move(fis);
    return cand;
}

std::vector<double> fofpi_vector_from_fopi(const std::vector<double>& fopi_vec,
                                           double blend_m) {
    if (fopi_vec.size() != kFopiDim)
        throw config_error("fofpi_vector_from_fopi: FOPI vector must be 6-dim");
    std::vector<double> x;
    x.reserve(kFofpiDim);
    for (int input = 0; input < 2; ++input) {
        const double centers[3] = {-1.0, 0.0, 1.0};
        for (int mf = 0; mf < 3; ++mf) {
            x.push_back(centers[mf]);
            x.push_back(0.36);
            x.push_back(0.6);
        }
    }
    for (int j = 0; j < 9; ++j) x.push_back(fopi_vec[0]); // theta_kp = kp_d
    for (int j = 0; j < 9; ++j) x.push_back(fopi_vec[1]); // theta_ki = ki_d
    x.push_back(blend_m);
    x.push_back(fopi_vec[2]); // alpha_d
    return x;
}

Scenario apply_candidate(const Scenario& base, const DecodedCandidate& cand,
                         ControllerKind target) {
    Scenario sc = base;
    sc.kind = target;
    sc.fopi_d = cand.fopi_d;
    sc.fopi_q = cand.fopi_q;
    if (target == ControllerKind::fofpi) {
        sc.fis_d = cand.fis;
        sc.fis_q = cand.fis;
    }
    return sc;
}

double evaluate_candidate(const std::vector<double>& x, const TuningSpec& spec) {
    if (spec.scenarios.empty())
        throw config_error("evaluate_candidate: tuning spec has no scenarios");

    DecodedCandidate cand;
    try {
        const double e_scale = 1.0 / spec.i_nominal;
        const double de_scale = spec.scenarios.front().dt_ctrl / (0.1 * spec.i_nominal);
        cand = decode_candidate(x, spec.target, e_scale, de_scale);
    } catch (const config_error&) {
        return 1e6; // undecodable candidate
    }

    double total = 0.0;
    for (const Scenario& base : spec.scenarios) {
        const Scenario sc = apply_candidate(base, cand, spec.target);
        RunLog log;
        try {
            log = run_scenario(sc);
        } catch (const config_error&) {
            return 1e6; // candidate cannot even construct the loop
        }
        const RunSummary sum = summarize(log, sc);

        double f = 0.0;
        const double overflow = log.max_abs_i_phase / (10.0 * spec.i_nominal);
        if (sum.faulted || !std::isfinite(log.max_abs_i_phase) || overflow > 1.0) {
            f = 1e3 + (std::isfinite(overflow) ? overflow : 1e3);
        } else if (!sum.thd_ll) {
            f = 1e3; // degenerate fundamental: no usable waveform
        } else {
            f = sum.thd_ll->thd;
            const double rel_err =
                sum.id_tracking_rms / std::max(1e-9, std::abs(sc.id_ref));
            f += spec.track_weight * std::max(0.0, rel_err - spec.track_tol);
        }
        total += f;
    }
    return total / static_cast<double>(spec.scenarios.size()) + cand.repair_penalty;
}

} // namespace mmck

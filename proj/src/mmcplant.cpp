#include "mmck/mmcplant.hpp"

#include "mmck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mmck {

namespace {
constexpr double kTwoThirdsPi = 2.0 * std::numbers::pi / 3.0;
}

void MmcParams::validate() const {
    if (n_cells < 1) throw config_error("MmcParams: n_cells must be >= 1");
    if (!(arm_inductance > 0.0)) throw config_error("MmcParams: arm_inductance must be > 0");
    if (!(cell_capacitance > 0.0)) throw config_error("MmcParams: cell_capacitance must be > 0");
    if (!(arm_resistance >= 0.0)) throw config_error("MmcParams: arm_resistance must be >= 0");
    if (!(vdc > 0.0)) throw config_error("MmcParams: vdc must be > 0");
    if (!(grid_freq > 0.0)) throw config_error("MmcParams: grid_freq must be > 0");
}

MmcState MmcState::precharged(const MmcParams& p) {
    MmcState s;
    const double v0 = p.vdc / p.n_cells;
    for (int ph = 0; ph < 3; ++ph) {
        s.vcap_upper[ph].assign(p.n_cells, v0);
        s.vcap_lower[ph].assign(p.n_cells, v0);
    }
    return s;
}

std::size_t MmcState::size() const {
    return 3 * (2 + vcap_upper[0].size() + vcap_lower[0].size());
}

void MmcState::to_flat(std::vector<double>& out) const {
    out.clear();
    out.reserve(size());
    for (int ph = 0; ph < 3; ++ph) {
        out.push_back(i_upper[ph]);
        out.push_back(i_lower[ph]);
        out.insert(out.end(), vcap_upper[ph].begin(), vcap_upper[ph].end());
        out.insert(out.end(), vcap_lower[ph].begin(), vcap_lower[ph].end());
    }
}

void MmcState::from_flat(const std::vector<double>& in) {
    std::size_t k = 0;
    for (int ph = 0; ph < 3; ++ph) {
        i_upper[ph] = in[k++];
        i_lower[ph] = in[k++];
        for (double& v : vcap_upper[ph]) v = in[k++];
        for (double& v : vcap_lower[ph]) v = in[k++];
    }
}

ArmDuties ArmDuties::uniform(int n_cells, double d_upper, double d_lower) {
    ArmDuties d;
    for (int ph = 0; ph < 3; ++ph) {
        d.upper[ph].assign(n_cells, d_upper);
        d.lower[ph].assign(n_cells, d_lower);
    }
    return d;
}

Abc grid_voltage(const MmcParams& p, double t) {
    const double th = p.grid_freq * t;
    return {p.grid_amplitude * std::cos(th),
            p.grid_amplitude * std::cos(th - kTwoThirdsPi),
            p.grid_amplitude * std::cos(th + kTwoThirdsPi)};
}

MmcState derivatives(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                     double t) {
    MmcState dot;
    const Abc v_grid = grid_voltage(p, t);
    const double inv_l = 1.0 / p.arm_inductance;
    const double inv_c = 1.0 / p.cell_capacitance;
    for (int ph = 0; ph < 3; ++ph) {
        const int n = static_cast<int>(state.vcap_upper[ph].size());
        double v_ins_u = 0.0;
        double v_ins_l = 0.0;
        for (int i = 0; i < n; ++i) {
            v_ins_u += duties.upper[ph][i] * state.vcap_upper[ph][i];
            v_ins_l += duties.lower[ph][i] * state.vcap_lower[ph][i];
        }
        dot.i_upper[ph] = inv_l * (0.5 * p.vdc - v_ins_u - p.arm_resistance * state.i_upper[ph] -
                                   v_grid[ph]);
        dot.i_lower[ph] = inv_l * (0.5 * p.vdc - v_ins_l - p.arm_resistance * state.i_lower[ph] +
                                   v_grid[ph]);
        dot.vcap_upper[ph].resize(n);
        dot.vcap_lower[ph].resize(n);
        for (int i = 0; i < n; ++i) {
            dot.vcap_upper[ph][i] = inv_c * duties.upper[ph][i] * state.i_upper[ph];
            dot.vcap_lower[ph][i] = inv_c * duties.lower[ph][i] * state.i_lower[ph];
        }
    }
    return dot;
}

ModulationResult modulate(const Abc& v_ref, const MmcParams& p) {
    ModulationResult out;
    for (int ph = 0; ph < 3; ++ph) {
        if (!std::isfinite(v_ref[ph]))
            throw simulation_fault("modulate: non-finite voltage reference", 0.0);
        double n_u = 0.5 - v_ref[ph] / p.vdc;
        double n_l = 0.5 + v_ref[ph] / p.vdc;
        if (n_u < 0.0 || n_u > 1.0 || n_l < 0.0 || n_l > 1.0) ++out.clamp_count;
        n_u = std::clamp(n_u, 0.0, 1.0);
        n_l = std::clamp(n_l, 0.0, 1.0);
        out.duties.upper[ph].assign(p.n_cells, n_u);
        out.duties.lower[ph].assign(p.n_cells, n_l);
    }
    return out;
}

namespace {

std::vector<double> sort_arm(const std::vector<double>& vcaps, double index_sum,
                             double arm_current) {
    const int n = static_cast<int>(vcaps.size());
    const int k = std::clamp(static_cast<int>(std::lround(index_sum)), 0, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // charging: insert the lowest-voltage cells; discharging: the highest.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return arm_current >= 0.0 ? vcaps[a] < vcaps[b] : vcaps[a] > vcaps[b];
    });
    std::vector<double> duties(n, 0.0);
    for (int i = 0; i < k; ++i) duties[order[i]] = 1.0;
    return duties;
}

} // namespace

ArmDuties balance_sort(const MmcState& state, const ArmDuties& duties, const MmcParams& p) {
    ArmDuties out;
    for (int ph = 0; ph < 3; ++ph) {
        const double sum_u =
            std::accumulate(duties.upper[ph].begin(), duties.upper[ph].end(), 0.0);
        const double sum_l =
            std::accumulate(duties.lower[ph].begin(), duties.lower[ph].end(), 0.0);
        out.upper[ph] = sort_arm(state.vcap_upper[ph], sum_u, state.i_upper[ph]);
        out.lower[ph] = sort_arm(state.vcap_lower[ph], sum_l, state.i_lower[ph]);
    }
    (void)p;
    return out;
}

MmcOutputs outputs(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                   double t) {
    MmcOutputs out;
    out.theta_grid = p.grid_freq * t;
    for (int ph = 0; ph < 3; ++ph) {
        out.i_phase[ph] = state.i_upper[ph] - state.i_lower[ph];
        out.i_circ[ph] = 0.5 * (state.i_upper[ph] + state.i_lower[ph]);
        double v_u = 0.0;
        double v_l = 0.0;
        const int n = static_cast<int>(state.vcap_upper[ph].size());
        for (int i = 0; i < n; ++i) {
            v_u += duties.upper[ph][i] * state.vcap_upper[ph][i];
            v_l += duties.lower[ph][i] * state.vcap_lower[ph][i];
        }
        out.v_conv[ph] = 0.5 * (v_l - v_u);
    }
    out.v_ll = {out.v_conv[0] - out.v_conv[1], out.v_conv[1] - out.v_conv[2],
                out.v_conv[2] - out.v_conv[0]};
    out.v_dq = abc_to_dq(out.v_conv, out.theta_grid);
    out.i_dq = abc_to_dq(out.i_phase, out.theta_grid);
    return out;
}

double stored_energy(const MmcState& state, const MmcParams& p) {
    double e = 0.0;
    for (int ph = 0; ph < 3; ++ph) {
        e += 0.5 * p.arm_inductance *
             (state.i_upper[ph] * state.i_upper[ph] + state.i_lower[ph] * state.i_lower[ph]);
        for (double v : state.vcap_upper[ph]) e += 0.5 * p.cell_capacitance * v * v;
        for (double v : state.vcap_lower[ph]) e += 0.5 * p.cell_capacitance * v * v;
    }
    return e;
}

} // namespace mmck

#include "mmck/simkit.hpp"

#include "mmck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

namespace mmck {

double vdc_at(const VdcProfile& profile, double t) {
    if (profile.empty()) throw config_error("vdc profile is empty");
    double v = profile.front().second;
    for (const auto& [tk, vk] : profile) {
        if (t + 1e-12 >= tk) v = vk;
        else break;
    }
    return v;
}

void Scenario::validate() const {
    plant.validate();
    if (!(dt_sim > 0.0) || !(dt_ctrl > 0.0))
        throw config_error("Scenario: dt_sim and dt_ctrl must be > 0");
    const double ratio = dt_ctrl / dt_sim;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        throw config_error("Scenario: dt_ctrl must be an integer multiple of dt_sim");
    const double period = 2.0 * std::numbers::pi / plant.grid_freq;
    if (duration < (2.0 + thd_window_cycles) * period)
        throw config_error("Scenario: duration must cover 2 periods plus the THD window");
    if (vdc_profile.empty() || vdc_profile.front().first > 1e-12)
        throw config_error("Scenario: vdc_profile must start at t = 0");
    for (std::size_t i = 1; i < vdc_profile.size(); ++i)
        if (vdc_profile[i].first <= vdc_profile[i - 1].first)
            throw config_error("Scenario: vdc_profile times must be strictly increasing");
    for (const auto& [tk, vk] : vdc_profile)
        if (!(vk > 0.0)) throw config_error("Scenario: vdc must stay > 0");
    if (kind == ControllerKind::fofpi && (!fis_d || !fis_q))
        throw config_error("Scenario: FOFPI controller requires FIS blocks for both axes");
    if (thd_window_cycles < 2)
        throw config_error("Scenario: thd_window_cycles must be >= 2");
}

namespace {

// Flat state layout per phase: [i_u, i_l, vcap_u[0..n), vcap_l[0..n)].
// Flat duty layout per phase: [d_u[0..n), d_l[0..n)].
struct FlatPlant {
    MmcParams p;
    int n = 0;
    int stride = 0;

    explicit FlatPlant(const MmcParams& params)
        : p(params), n(params.n_cells), stride(2 + 2 * params.n_cells) {}

    void deriv(const std::vector<double>& x, const std::vector<double>& d, double t,
               std::vector<double>& out) const {
        const Abc vg = grid_voltage(p, t);
        const double inv_l = 1.0 / p.arm_inductance;
        const double inv_c = 1.0 / p.cell_capacitance;
        for (int ph = 0; ph < 3; ++ph) {
            const int xb = ph * stride;
            const int db = ph * 2 * n;
            const double iu = x[xb];
            const double il = x[xb + 1];
            double v_ins_u = 0.0, v_ins_l = 0.0;
            for (int i = 0; i < n; ++i) {
                v_ins_u += d[db + i] * x[xb + 2 + i];
                v_ins_l += d[db + n + i] * x[xb + 2 + n + i];
            }
            out[xb] = inv_l * (0.5 * p.vdc - v_ins_u - p.arm_resistance * iu - vg[ph]);
            out[xb + 1] = inv_l * (0.5 * p.vdc - v_ins_l - p.arm_resistance * il + vg[ph]);
            for (int i = 0; i < n; ++i) {
                out[xb + 2 + i] = inv_c * d[db + i] * iu;
                out[xb + 2 + n + i] = inv_c * d[db + n + i] * il;
            }
        }
    }
};

void flatten_duties(const ArmDuties& duties, int n, std::vector<double>& out) {
    out.clear();
    out.reserve(static_cast<std::size_t>(6) * n);
    for (int ph = 0; ph < 3; ++ph) {
        out.insert(out.end(), duties.upper[ph].begin(), duties.upper[ph].end());
        out.insert(out.end(), duties.lower[ph].begin(), duties.lower[ph].end());
    }
}

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, tmp;
    void resize(std::size_t n) {
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
        tmp.resize(n);
    }
};

void rk4_flat(const FlatPlant& plant, std::vector<double>& x, const std::vector<double>& d,
              double t, double dt, Rk4Scratch& s) {
    const std::size_t m = x.size();
    plant.deriv(x, d, t, s.k1);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + 0.5 * dt * s.k1[i];
    plant.deriv(s.tmp, d, t + 0.5 * dt, s.k2);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + 0.5 * dt * s.k2[i];
    plant.deriv(s.tmp, d, t + 0.5 * dt, s.k3);
    for (std::size_t i = 0; i < m; ++i) s.tmp[i] = x[i] + dt * s.k3[i];
    plant.deriv(s.tmp, d, t + dt, s.k4);
    for (std::size_t i = 0; i < m; ++i)
        x[i] += dt / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

MmcState rk4_step(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                  double t, double dt) {
    if (!(dt > 0.0)) throw config_error("rk4_step: dt must be > 0");
    FlatPlant plant(p);
    std::vector<double> x;
    state.to_flat(x);
    std::vector<double> d;
    flatten_duties(duties, p.n_cells, d);
    Rk4Scratch scratch;
    scratch.resize(x.size());
    rk4_flat(plant, x, d, t, dt, scratch);
    for (double v : x)
        if (!std::isfinite(v))
            throw simulation_fault("rk4_step: non-finite state", t + dt);
    MmcState next = state;
    next.from_flat(x);
    return next;
}

int RunLog::column(const std::string& name) const {
    const auto it = std::find(channels.begin(), channels.end(), name);
    return it == channels.end() ? -1 : static_cast<int>(it - channels.begin());
}

std::vector<double> RunLog::series(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw config_error("RunLog: unknown channel " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
}

RunLog run_scenario(const Scenario& sc) {
    sc.validate();

    const double vdc0 = vdc_at(sc.vdc_profile, 0.0);
    MmcParams params = sc.plant;
    params.vdc = vdc0;
    const double u_max = sc.u_max > 0.0 ? sc.u_max : 1.2 * vdc0 / 2.0;

    const FracOperator integ_d = design_oustaloup(-sc.fopi_d.alpha, sc.fractional.n_filter,
                                                  sc.fractional.omega_b, sc.fractional.omega_h);
    const FracOperator integ_q = design_oustaloup(-sc.fopi_q.alpha, sc.fractional.n_filter,
                                                  sc.fractional.omega_b, sc.fractional.omega_h);
    const bool fuzzy = sc.kind == ControllerKind::fofpi;
    Controller ctrl_d(sc.fopi_d, integ_d, sc.dt_ctrl, u_max,
                      fuzzy ? sc.fis_d : std::nullopt, sc.tau_d_factor);
    Controller ctrl_q(sc.fopi_q, integ_q, sc.dt_ctrl, u_max,
                      fuzzy ? sc.fis_q : std::nullopt, sc.tau_d_factor);

    RunLog log;
    log.channels = {"t",   "id_ref", "iq_ref", "i_d",  "i_q",  "e_d",  "e_q",
                    "u_d", "u_q",    "kp_d",   "ki_d", "kp_q", "ki_q", "v_ll_ab",
                    "v_ll_bc", "v_ll_ca"};
    for (const char* ph : {"a", "b", "c"}) {
        log.channels.push_back(std::string("i_u_") + ph);
        log.channels.push_back(std::string("i_l_") + ph);
        log.channels.push_back(std::string("i_ph_") + ph);
        log.channels.push_back(std::string("i_circ_") + ph);
    }
    for (const char* arm : {"u_a", "l_a", "u_b", "l_b", "u_c", "l_c"}) {
        log.channels.push_back(std::string("vcap_mean_") + arm);
        log.channels.push_back(std::string("vcap_min_") + arm);
        log.channels.push_back(std::string("vcap_max_") + arm);
    }

    MmcState state = MmcState::precharged(params);
    ArmDuties duties = ArmDuties::uniform(params.n_cells, 0.5, 0.5);

    FlatPlant plant(params);
    std::vector<double> x;
    state.to_flat(x);
    std::vector<double> d_flat;
    flatten_duties(duties, params.n_cells, d_flat);
    Rk4Scratch scratch;
    scratch.resize(x.size());

    const int n_sub = static_cast<int>(std::round(sc.dt_ctrl / sc.dt_sim));
    const long n_ctrl = std::lround(sc.duration / sc.dt_ctrl);

    log.energy_initial = stored_energy(state, params);

    auto power_terms = [&](const std::vector<double>& xs, double t, double vdc, double& p_dc,
                           double& p_loss, double& p_ac) {
        const Abc vg = grid_voltage(params, t);
        p_dc = p_loss = p_ac = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            const double iu = xs[static_cast<std::size_t>(ph) * plant.stride];
            const double il = xs[static_cast<std::size_t>(ph) * plant.stride + 1];
            p_dc += 0.5 * vdc * (iu + il);
            p_loss += params.arm_resistance * (iu * iu + il * il);
            p_ac += vg[ph] * (iu - il);
        }
    };

    try {
        for (long k = 0; k <= n_ctrl; ++k) {
            const double t = static_cast<double>(k) * sc.dt_ctrl;
            plant.p.vdc = vdc_at(sc.vdc_profile, t);

            state.from_flat(x);
            for (double v : x)
                if (!std::isfinite(v)) throw simulation_fault("non-finite plant state", t);

            const MmcOutputs out = outputs(state, duties, plant.p, t);
            const double e_d = sc.id_ref - out.i_dq.d;
            const double e_q = sc.iq_ref - out.i_dq.q;
            const double u_d = ctrl_d.step(e_d, sc.dt_ctrl);
            const double u_q = ctrl_q.step(e_q, sc.dt_ctrl);
            const Abc v_ref = dq_to_abc({u_d, u_q}, out.theta_grid);
            duties = modulate(v_ref, plant.p).duties;
            if (sc.balance_sorting) duties = balance_sort(state, duties, plant.p);
            flatten_duties(duties, params.n_cells, d_flat);

            std::vector<double> row = {t,   sc.id_ref, sc.iq_ref, out.i_dq.d, out.i_dq.q,
                                       e_d, e_q,       u_d,       u_q,        ctrl_d.last_kp(),
                                       ctrl_d.last_ki(), ctrl_q.last_kp(), ctrl_q.last_ki(),
                                       out.v_ll[0], out.v_ll[1], out.v_ll[2]};
            for (int ph = 0; ph < 3; ++ph) {
                row.push_back(state.i_upper[ph]);
                row.push_back(state.i_lower[ph]);
                row.push_back(out.i_phase[ph]);
                row.push_back(out.i_circ[ph]);
                log.max_abs_i_phase = std::max(log.max_abs_i_phase, std::abs(out.i_phase[ph]));
            }
            for (int ph = 0; ph < 3; ++ph) {
                for (const auto* caps : {&state.vcap_upper[ph], &state.vcap_lower[ph]}) {
                    const auto [mn, mx] = std::minmax_element(caps->begin(), caps->end());
                    const double mean =
                        std::accumulate(caps->begin(), caps->end(), 0.0) /
                        static_cast<double>(caps->size());
                    row.push_back(mean);
                    row.push_back(*mn);
                    row.push_back(*mx);
                }
            }
            log.rows.push_back(std::move(row));

            if (k == n_ctrl) break;

            double p_dc0, p_loss0, p_ac0;
            power_terms(x, t, plant.p.vdc, p_dc0, p_loss0, p_ac0);
            for (int s = 0; s < n_sub; ++s) {
                const double ts = t + static_cast<double>(s) * sc.dt_sim;
                plant.p.vdc = vdc_at(sc.vdc_profile, ts);
                rk4_flat(plant, x, d_flat, ts, sc.dt_sim, scratch);
                double p_dc1, p_loss1, p_ac1;
                power_terms(x, ts + sc.dt_sim, plant.p.vdc, p_dc1, p_loss1, p_ac1);
                log.int_p_dc += 0.5 * sc.dt_sim * (p_dc0 + p_dc1);
                log.int_p_loss += 0.5 * sc.dt_sim * (p_loss0 + p_loss1);
                log.int_p_ac += 0.5 * sc.dt_sim * (p_ac0 + p_ac1);
                p_dc0 = p_dc1;
                p_loss0 = p_loss1;
                p_ac0 = p_ac1;
            }
        }
    } catch (const simulation_fault& f) {
        log.fault = FaultRecord{f.t, f.what()};
    }

    state.from_flat(x);
    log.energy_final = stored_energy(state, params);

    std::uint64_t h = 1469598103934665603ull;
    for (const auto& r : log.rows)
        h = fnv1a(h, r.data(), r.size() * sizeof(double));
    log.fingerprint = h;
    return log;
}

RunSummary summarize(const RunLog& log, const Scenario& sc) {
    RunSummary s;
    s.faulted = log.fault.has_value();
    if (log.rows.empty()) return s;

    const auto kp_d = log.series("kp_d");
    const auto ki_d = log.series("ki_d");
    const auto [kpmn, kpmx] = std::minmax_element(kp_d.begin(), kp_d.end());
    const auto [kimn, kimx] = std::minmax_element(ki_d.begin(), ki_d.end());
    s.kp_d_min = *kpmn;
    s.kp_d_max = *kpmx;
    s.ki_d_min = *kimn;
    s.ki_d_max = *kimx;

    const double f0 = sc.plant.grid_freq / (2.0 * std::numbers::pi);
    const double fs = 1.0 / sc.dt_ctrl;
    const std::size_t n_window = std::min(
        log.rows.size(),
        static_cast<std::size_t>(std::llround(sc.thd_window_cycles * fs / f0)));

    const auto v_ll = log.series("v_ll_ab");
    if (!s.faulted) {
        try {
            s.thd_ll = thd(std::span<const double>(v_ll).last(n_window), fs, f0);
        } catch (const analysis_error&) {
            // degenerate fundamental: leave thd_ll empty
        }
    }

    const auto e_d = log.series("e_d");
    const auto e_q = log.series("e_q");
    double sd = 0.0, sq = 0.0;
    for (std::size_t i = e_d.size() - n_window; i < e_d.size(); ++i) {
        sd += e_d[i] * e_d[i];
        sq += e_q[i] * e_q[i];
    }
    s.id_tracking_rms = std::sqrt(sd / static_cast<double>(n_window));
    s.iq_tracking_rms = std::sqrt(sq / static_cast<double>(n_window));
    return s;
}

void write_csv(const RunLog& log, const std::string& path, int decimation) {
    if (decimation < 1) throw config_error("write_csv: decimation must be >= 1");
    std::ofstream f(path);
    if (!f) throw config_error("write_csv: cannot open " + path);
    for (std::size_t i = 0; i < log.channels.size(); ++i)
        f << (i ? "," : "") << log.channels[i];
    f << "\n";
    char buf[32];
    for (std::size_t r = 0; r < log.rows.size(); r += static_cast<std::size_t>(decimation)) {
        const auto& row = log.rows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            f << (i ? "," : "") << buf;
        }
        f << "\n";
    }
}

void write_svg_plot(const RunLog& log, const std::vector<std::string>& channels,
                    const std::string& title, const std::string& path) {
    const int W = 960, H = 480, ML = 60, MR = 20, MT = 30, MB = 40;
    if (log.rows.empty()) throw config_error("write_svg_plot: empty log");

    const auto t = log.series("t");
    double ymin = 1e300, ymax = -1e300;
    std::vector<std::vector<double>> data;
    for (const auto& ch : channels) {
        data.push_back(log.series(ch));
        for (double v : data.back()) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (ymax <= ymin) ymax = ymin + 1.0;

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    auto sx = [&](double v) {
        return ML + (v - t.front()) / (t.back() - t.front()) * (W - ML - MR);
    };
    auto sy = [&](double v) { return H - MB - (v - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ofstream f(path);
    if (!f) throw config_error("write_svg_plot: cannot open " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n"
      << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
      << "' stroke='black'/>\n"
      << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
      << "' stroke='black'/>\n";
    for (std::size_t c = 0; c < data.size(); ++c) {
        f << "<polyline fill='none' stroke='" << colors[c % 6] << "' stroke-width='1' points='";
        const std::size_t step = std::max<std::size_t>(1, t.size() / 4000);
        for (std::size_t i = 0; i < t.size(); i += step)
            f << sx(t[i]) << "," << sy(data[c][i]) << " ";
        f << "'/>\n<text x='" << W - MR - 120 << "' y='" << MT + 16 * (c + 1) << "' fill='"
          << colors[c % 6] << "' font-size='12'>" << channels[c] << "</text>\n";
    }
    f << "<text x='" << ML << "' y='" << MT - 6 << "' font-size='11'>" << ymax << "</text>\n"
      << "<text x='" << ML << "' y='" << H - MB + 14 << "' font-size='11'>" << ymin
      << "</text>\n"
      << "<text x='" << W - MR - 40 << "' y='" << H - MB + 28 << "' font-size='11'>t="
      << t.back() << "s</text>\n</svg>\n";
}

} // namespace mmck

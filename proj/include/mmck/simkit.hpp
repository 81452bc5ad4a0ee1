#pragma once

#include "mmck/controllers.hpp"
#include "mmck/mmcplant.hpp"
#include "mmck/signals.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmck {

enum class ControllerKind { fopi, fofpi };

struct FractionalConfig {
    int n_filter = 20;
    double omega_b = 1e-3;  // rad/s
    double omega_h = 1e3;   // rad/s
};

// Piecewise-constant DC-link schedule; (t, V) pairs, t ascending, first t = 0.
using VdcProfile = std::vector<std::pair<double, double>>;

double vdc_at(const VdcProfile& profile, double t);

struct Scenario {
    MmcParams plant;                // plant.vdc is overridden by vdc_profile
    bool balance_sorting = false;
    double duration = 2.0;          // s
    double dt_sim = 2e-5;           // s
    double dt_ctrl = 1e-4;          // s, integer multiple of dt_sim
    VdcProfile vdc_profile{{0.0, 450.0}};
    double id_ref = 10.0;           // A
    double iq_ref = 0.0;            // A
    ControllerKind kind = ControllerKind::fopi;
    FopiParams fopi_d;
    FopiParams fopi_q;
    std::optional<It2Fis> fis_d;    // required for fofpi
    std::optional<It2Fis> fis_q;
    FractionalConfig fractional;
    double u_max = 0.0;             // 0 => 1.2 * vdc(0) / 2
    double tau_d_factor = 10.0;
    int thd_window_cycles = 5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct FaultRecord {
    double t = 0.0;
    std::string what;
};

struct RunLog {
    std::vector<std::string> channels;
    std::vector<std::vector<double>> rows; // one row per control step
    std::optional<FaultRecord> fault;
    std::uint64_t fingerprint = 0;

    // energy bookkeeping over the whole run
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double int_p_dc = 0.0;   // integral of DC-side power [J]
    double int_p_loss = 0.0; // integral of resistive losses [J]
    double int_p_ac = 0.0;   // integral of AC-side delivered power [J]
    double max_abs_i_phase = 0.0;

    int column(const std::string& name) const; // -1 when missing
    std::vector<double> series(const std::string& name) const;
};

// Classical RK4 on the MMC derivatives with duties held over the step.
MmcState rk4_step(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                  double t, double dt);

// Closed-loop run: control at dt_ctrl, integration at dt_sim, logging at dt_ctrl.
// A simulation fault yields a partial log with a fault record, not a throw.
RunLog run_scenario(const Scenario& sc);

struct RunSummary {
    std::optional<ThdReport> thd_ll;     // line-line voltage ab, final window
    double id_tracking_rms = 0.0;        // over the THD window
    double iq_tracking_rms = 0.0;
    double kp_d_min = 0.0, kp_d_max = 0.0;
    double ki_d_min = 0.0, ki_d_max = 0.0;
    bool faulted = false;
};

RunSummary summarize(const RunLog& log, const Scenario& sc);

void write_csv(const RunLog& log, const std::string& path, int decimation = 1);

// Minimal static line plot: one polyline per named channel against t.
void write_svg_plot(const RunLog& log, const std::vector<std::string>& channels,
                    const std::string& title, const std::string& path);

} // namespace mmck

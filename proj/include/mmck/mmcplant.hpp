#pragma once

#include "mmck/signals.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace mmck {

struct MmcParams {
    int n_cells = 4;              // cells per arm
    double arm_inductance = 5e-3; // H
    double arm_resistance = 0.1;  // Ohm
    double cell_capacitance = 2e-3; // F
    double vdc = 450.0;           // V, scenario code may override per step
    double grid_amplitude = 157.5; // V phase peak
    double grid_freq = 2.0 * 3.14159265358979323846 * 50.0; // rad/s

    void validate() const;
};

// Per-phase arm currents plus per-cell capacitor voltages, three phases.
struct MmcState {
    std::array<double, 3> i_upper{};
    std::array<double, 3> i_lower{};
    std::array<std::vector<double>, 3> vcap_upper;
    std::array<std::vector<double>, 3> vcap_lower;

    static MmcState precharged(const MmcParams& p); // caps at vdc/n_cells, currents zero
    std::size_t size() const;                       // 3 * (2 + 2 * n_cells)

    // flat layout per phase: i_u, i_l, vcap_u[0..n), vcap_l[0..n)
    void to_flat(std::vector<double>& out) const;
    void from_flat(const std::vector<double>& in);
};

// Per-cell insertion duties in [0, 1]; one insertion function per cell drives
// both the KVL voltage sum and the capacitor charging current.
struct ArmDuties {
    std::array<std::vector<double>, 3> upper;
    std::array<std::vector<double>, 3> lower;

    static ArmDuties uniform(int n_cells, double d_upper, double d_lower);
};

// Ideal stiff grid, phase a = amplitude * cos(grid_freq * t).
Abc grid_voltage(const MmcParams& p, double t);

MmcState derivatives(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                     double t);

struct ModulationResult {
    ArmDuties duties;
    int clamp_count = 0; // overmodulation diagnostic
};

// Scalar insertion indices n_u = 1/2 - v_ref/vdc, n_l = 1/2 + v_ref/vdc,
// clamped to [0, 1], applied uniformly to all cells of an arm.
ModulationResult modulate(const Abc& v_ref, const MmcParams& p);

// Optional capacitor balancing: converts the scalar index into binary per-cell
// duties, charging the lowest-voltage cells first (highest first on discharge).
ArmDuties balance_sort(const MmcState& state, const ArmDuties& duties,
                       const MmcParams& p);

struct MmcOutputs {
    Abc i_phase{};   // i_u - i_l
    Abc i_circ{};    // (i_u + i_l) / 2
    Abc v_conv{};    // synthesized converter phase voltage (v_arm_l - v_arm_u)/2
    Abc v_ll{};      // ab, bc, ca from v_conv
    Dq v_dq{};
    Dq i_dq{};
    double theta_grid = 0.0;
};

MmcOutputs outputs(const MmcState& state, const ArmDuties& duties, const MmcParams& p,
                   double t);

double stored_energy(const MmcState& state, const MmcParams& p);

} // namespace mmck

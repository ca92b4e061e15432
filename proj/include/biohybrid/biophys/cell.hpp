#pragma once

#include <array>
#include <cstddef>

#include "biohybrid/biophys/params.hpp"

namespace biohybrid::biophys {

// Gate order inside CellState::gating. Na activation (m) is instantaneous and
// therefore not part of the state.
enum Gate : std::size_t { kGateH = 0, kGateN, kGateS, kGateC, kGateQ, kGateCount };

struct CellState {
    double v_s = 0.0;  // somatic voltage, mV
    double v_d = 0.0;  // dendritic voltage, mV
    std::array<double, kGateCount> gating{};
    double ca = 0.0;   // dendritic calcium, model units

    bool finite() const noexcept;
};

// Time derivative of every CellState component (same layout, per ms).
using CellDerivative = CellState;

// Membrane currents at a given state (uA/cm^2, outward positive).
struct ChannelCurrents {
    double leak_s, na, dr;
    double leak_d, ca, ahp, kca;
};

// i_inject: somatic injected current density (uA/cm^2, inward positive).
// i_syn: dendritic synaptic current density g*(V_d - E_syn) (uA/cm^2, outward positive).
CellDerivative pr_derivatives(const CellState& state, const NeuronParams& params, double i_inject,
                              double i_syn);

ChannelCurrents channel_currents(const CellState& state, const NeuronParams& params);

// Steady-state gating and calcium at clamped voltages v_s / v_d.
CellState steady_state_at(double v_s, double v_d, const NeuronParams& params);

// Fixed point of the unstimulated cell nearest e_leak (Newton on the voltage
// equations, gating slaved to steady state). Throws ConfigError if none is found.
CellState resting_state(const NeuronParams& params);

// Drive applied during one integration step, sampled at the three RK4 abscissae
// (start, midpoint, end of the step).
// The synaptic point current is g_syn * V_d - g_syn_rev (nA), where g_syn_rev
// is the conductance-weighted sum of reversal potentials (uS * mV).
struct StepDrive {
    std::array<double, 3> i_inject{};   // uA/cm^2 somatic
    std::array<double, 3> g_syn{};      // uS total dendritic synaptic conductance
    std::array<double, 3> g_syn_rev{};  // uS * mV
};

enum class Integrator { RungeKutta4, Euler };

// Advances `state` by dt (ms). Gating is clamped to [0, 1] and calcium to >= 0.
// Throws PreconditionError for dt <= 0 and DivergenceError on NaN/Inf.
CellState integrate_step(const CellState& state, const NeuronParams& params, const StepDrive& drive,
                         double dt, Integrator scheme = Integrator::RungeKutta4, int neuron_id = -1,
                         double t_ms = 0.0);

}  // namespace biohybrid::biophys

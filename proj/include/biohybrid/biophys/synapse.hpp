#pragma once

#include <span>

#include "biohybrid/biophys/params.hpp"

namespace biohybrid::biophys {

// Alpha-function conductance (uS) at time t of a spike emitted at t_spike:
// gbar * (D/tau) * exp(-D/tau) with D = t - t_spike - delay, zero for D < 0.
double alpha_conductance(double t, double t_spike, const SynapseParams& syn);

// Sum of alpha_conductance over several presynaptic spikes through the same synapse.
double alpha_conductance(double t, std::span<const double> spike_times, const SynapseParams& syn);

// g * (v_d - e_syn); uS * mV = nA, outward positive.
double synaptic_current(double g, double v_d, double e_syn);

}  // namespace biohybrid::biophys

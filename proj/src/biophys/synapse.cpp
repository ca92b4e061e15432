#include "biohybrid/biophys/synapse.hpp"

#include <cmath>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

double alpha_conductance(double t, double t_spike, const SynapseParams& syn) {
    const double delta = t - t_spike - syn.delay;
    if (delta < 0.0) return 0.0;
    const double x = delta / syn.tau;
    return syn.gsyn_bar * x * std::exp(-x);
}

double alpha_conductance(double t, std::span<const double> spike_times, const SynapseParams& syn) {
    double g = 0.0;
    for (double ts : spike_times) g += alpha_conductance(t, ts, syn);
    return g;
}

double synaptic_current(double g, double v_d, double e_syn) {
    if (!(g >= 0.0)) throw PreconditionError("synaptic_current: conductance must be >= 0");
    return g * (v_d - e_syn);
}

}  // namespace biohybrid::biophys

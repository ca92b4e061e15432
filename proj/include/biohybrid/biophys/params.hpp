#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace biohybrid::biophys {

// Two-compartment Pinsky-Rinzel cell. Conductance densities are in S/cm^2 as
// tabulated for the fitted cells; voltages in absolute mV.
struct NeuronParams {
    double c_m = 10.0;        // uF/cm^2
    double e_leak = -45.0;    // mV
    double g_leak = 1.10e-3;  // S/cm^2
    double g_na = 8e-2;
    double g_dr = 2e-2;
    double g_ahp = 1e-2;
    double g_ca = 0.8e-2;
    double g_c_kca = 2e-2;
    double g_couple = 8e-3;   // soma-dendrite coupling, S/cm^2
    double p_soma = 0.5;      // somatic fraction of the membrane area
    double diameter = 20.0;   // um
    double e_na = 50.0;
    double e_k = -90.0;
    double e_ca = 120.0;
    // The rate functions are written in voltage relative to the cell's own
    // resting level; they are evaluated at V - (e_leak + kinetics_offset).
    double kinetics_offset = 2.5;  // mV

    void validate() const;
    friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

struct SynapseParams {
    double gsyn_bar = 0.72e-3;  // uS
    double tau = 4.5;           // ms
    double delay = 1.8;         // ms
    double e_syn = 0.0;         // mV

    void validate() const;
    friend bool operator==(const SynapseParams&, const SynapseParams&) = default;
};

constexpr std::size_t kNeuronLibrarySize = 9;
constexpr std::size_t kSynapseLibrarySize = 12;

// The nine fitted cells and twelve fitted synapses, in table order (index 0 = cell/synapse 1).
std::span<const NeuronParams> neuron_library();
std::span<const SynapseParams> synapse_library();

// Mean maximal synaptic conductance of the synapse library (uS).
double mean_library_gsyn();

// Total membrane area of the cell, modelled as a sphere of the given diameter (cm^2).
double membrane_area_cm2(const NeuronParams& p);

// pA injected at the soma -> uA/cm^2 of somatic membrane.
double injected_density(double current_pa, const NeuronParams& p);

// nA synaptic point current on the dendrite -> uA/cm^2 of dendritic membrane.
double synaptic_density(double current_na, const NeuronParams& p);

}  // namespace biohybrid::biophys

#include "biohybrid/biophys/params.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

namespace {

constexpr NeuronParams make_cell(double c_m, double e_leak, double g_leak_milli, double g_na_centi,
                                 double g_dr_centi, double g_ahp_centi, double g_ca_centi,
                                 double g_c_centi) {
    NeuronParams p{};
    p.c_m = c_m;
    p.e_leak = e_leak;
    p.g_leak = g_leak_milli * 1e-3;
    p.g_na = g_na_centi * 1e-2;
    p.g_dr = g_dr_centi * 1e-2;
    p.g_ahp = g_ahp_centi * 1e-2;
    p.g_ca = g_ca_centi * 1e-2;
    p.g_c_kca = g_c_centi * 1e-2;
    return p;
}

constexpr SynapseParams make_syn(double gsyn_milli, double tau, double delay) {
    return SynapseParams{gsyn_milli * 1e-3, tau, delay, 0.0};
}

// clang-format off
constexpr std::array<NeuronParams, kNeuronLibrarySize> kNeurons = {{
    //         c_m   E_L   gL(e-3) gNa(e-2) gDR  gAHP  gCa  gC
    make_cell(10,  -45,  1.10,   8,      2,    1,    0.8, 2),
    make_cell( 8,  -40,  0.85,   6,      2,    0.9,  0.8, 2),
    make_cell(10,  -45,  1.48,  15,      0.5,  0.1,  0.8, 2),
    make_cell(15,  -35,  1.15,  29,      2,    0.45, 0.8, 2.5),
    make_cell(15,  -45,  1.48,  25,      1,    0.1,  0.8, 10),
    make_cell(10,  -56,  2.10,   9,      9.9,  3,    0.8, 20),
    make_cell( 8,  -50,  0.8,    7,      2,    0.5,  0.8, 2),
    make_cell(10,  -60,  1.10,  11,     12,    0.5,  0.8, 2),
    make_cell( 8,  -60,  0.70,   8,      6,   12,    0.8, 10),
}};

constexpr std::array<SynapseParams, kSynapseLibrarySize> kSynapses = {{
    make_syn(0.72, 4.50, 1.80), make_syn(0.59, 5.70, 2.00), make_syn(0.34, 4.55, 2.00),
    make_syn(0.73, 7.80, 2.00), make_syn(0.69, 5.75, 2.00), make_syn(0.63, 6.96, 1.30),
    make_syn(1.15, 5.95, 2.00), make_syn(0.21, 6.00, 2.00), make_syn(1.17, 4.40, 1.40),
    make_syn(2.28, 4.75, 1.30), make_syn(0.59, 4.90, 2.00), make_syn(0.41, 6.99, 2.00),
}};
// clang-format on

}  // namespace

void NeuronParams::validate() const {
    const double gs[] = {g_leak, g_na, g_dr, g_ahp, g_ca, g_c_kca, g_couple};
    for (double g : gs) {
        if (!(g >= 0.0)) throw ConfigError("neuron conductances must be >= 0");
    }
    if (!(c_m > 0.0)) throw ConfigError("neuron c_m must be > 0");
    if (!(p_soma > 0.0 && p_soma < 1.0)) throw ConfigError("neuron p_soma must lie in (0, 1)");
    if (!(diameter > 0.0)) throw ConfigError("neuron diameter must be > 0");
}

void SynapseParams::validate() const {
    if (!(gsyn_bar > 0.0)) throw ConfigError("synapse gsyn_bar must be > 0");
    if (!(tau > 0.0)) throw ConfigError("synapse tau must be > 0");
    if (!(delay >= 0.0)) throw ConfigError("synapse delay must be >= 0");
}

std::span<const NeuronParams> neuron_library() { return kNeurons; }
std::span<const SynapseParams> synapse_library() { return kSynapses; }

double mean_library_gsyn() {
    double sum = 0.0;
    for (const auto& s : kSynapses) sum += s.gsyn_bar;
    return sum / static_cast<double>(kSynapses.size());
}

double membrane_area_cm2(const NeuronParams& p) {
    const double d_cm = p.diameter * 1e-4;
    return std::numbers::pi * d_cm * d_cm;
}

double injected_density(double current_pa, const NeuronParams& p) {
    // pA -> uA is 1e-6.
    return current_pa * 1e-6 / (p.p_soma * membrane_area_cm2(p));
}

double synaptic_density(double current_na, const NeuronParams& p) {
    // nA -> uA is 1e-3.
    return current_na * 1e-3 / ((1.0 - p.p_soma) * membrane_area_cm2(p));
}

}  // namespace biohybrid::biophys

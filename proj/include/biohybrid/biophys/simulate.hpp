#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "biohybrid/biophys/cell.hpp"
#include "biohybrid/biophys/network.hpp"
#include "biohybrid/biophys/spikes.hpp"

namespace biohybrid::biophys {

// Rectangular somatic current pulse given to every stimulated input neuron.
struct Stimulus {
    double amplitude_pa = 500.0;
    double onset_ms = 5.0;
    double width_ms = 3.0;

    // Whether the step [t, t + dt) is driven; a step is inside the pulse when
    // its midpoint is.
    bool active(double t, double dt) const noexcept {
        const double mid = t + 0.5 * dt;
        return mid >= onset_ms && mid < onset_ms + width_ms;
    }
};

struct SimConfig {
    double dt = 0.025;       // ms
    double duration = 60.0;  // ms
    Stimulus stimulus;
    // Stop integrating at this time; events at or after it are not recorded.
    std::optional<double> cutoff_time;
    std::uint64_t seed = 0;  // echoed in outputs; the engine itself is deterministic
    bool record_traces = false;
    Integrator scheme = Integrator::RungeKutta4;
    double spike_threshold = 0.0;  // mV

    void validate() const;
    // Number of integration steps until cutoff_time (or duration).
    long steps() const;
};

// One presynaptic spike arriving at a cell: the conductance kernel starts at
// `onset` (spike-peak time plus delay).
struct SynapticArrival {
    double onset = 0.0;
    double gsyn_bar = 0.0;
    double tau = 1.0;
    double e_syn = 0.0;
};

// A single Pinsky-Rinzel cell driven by injected current and alpha synapses,
// advanced one fixed step at a time.
class DrivenCell {
public:
    DrivenCell(const NeuronParams& params, const CellState& initial, double threshold, int id = -1);

    void add_arrival(const SynapticArrival& a) { arrivals_.push_back(a); }

    // Advances from t to t + dt; returns the spike-peak time once a peak has been passed.
    std::optional<double> step(double t, double dt, double injected_density, Integrator scheme);
    std::optional<double> finish() { return detector_.finish(); }

    const CellState& state() const noexcept { return state_; }

    // Total conductance (uS) and conductance-weighted reversal (uS*mV) at time t.
    void conductance_at(double t, double& g, double& g_rev) const;

private:
    void prune(double t);

    const NeuronParams* params_;
    CellState state_;
    SpikeDetector detector_;
    std::vector<SynapticArrival> arrivals_;
    int id_;
    long steps_since_prune_ = 0;
};

// Spike-peak times (and optionally the somatic trace) of an isolated cell that
// starts at rest and is stimulated with cfg.stimulus when `stimulated`.
struct IsolatedResponse {
    std::vector<double> spikes;
    std::vector<double> trace;
};
IsolatedResponse isolated_response(const NeuronParams& params, bool stimulated, const SimConfig& cfg);

// Integrates the whole network. Inputs whose pattern bit is 1 receive the
// stimulus simultaneously; spikes propagate through every outgoing edge with
// the edge's synapse delay.
SpikeRecord simulate_network(const BioNetwork& net, std::span<const std::uint8_t> input_pattern,
                             const SimConfig& cfg);

// Simulates one unstimulated cell receiving the given arrivals; stops at its
// first spike when `stop_at_first_spike` is set.
std::vector<double> simulate_driven_cell(const NeuronParams& params,
                                         std::span<const SynapticArrival> arrivals,
                                         const SimConfig& cfg, bool stop_at_first_spike);

// bit k = 1 iff outputs[k] has a spike-peak time < t_cut.
std::vector<std::uint8_t> apply_cutoff(const SpikeRecord& rec, double t_cut,
                                       std::span<const int> outputs);

}  // namespace biohybrid::biophys

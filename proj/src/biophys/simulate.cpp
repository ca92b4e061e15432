#include "biohybrid/biophys/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

namespace {

// Kernels older than this many time constants contribute < 1e-15 of gbar.
constexpr double kKernelHorizon = 40.0;
constexpr long kPruneInterval = 200;

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw PreconditionError("SimConfig: dt must be > 0");
    if (!(duration > 0.0)) throw PreconditionError("SimConfig: duration must be > 0");
    if (!(stimulus.width_ms >= 0.0) || !(stimulus.onset_ms >= 0.0)) {
        throw PreconditionError("SimConfig: stimulus onset and width must be >= 0");
    }
    if (duration < stimulus.onset_ms + stimulus.width_ms) {
        throw PreconditionError("SimConfig: duration must cover the stimulus pulse");
    }
    if (cutoff_time && (*cutoff_time < 0.0 || *cutoff_time > duration)) {
        throw PreconditionError("SimConfig: cutoff_time must lie in [0, duration]");
    }
}

long SimConfig::steps() const {
    const double end = cutoff_time ? *cutoff_time : duration;
    return std::lround(end / dt);
}

DrivenCell::DrivenCell(const NeuronParams& params, const CellState& initial, double threshold, int id)
    : params_(&params), state_(initial), detector_(threshold), id_(id) {}

void DrivenCell::conductance_at(double t, double& g, double& g_rev) const {
    g = 0.0;
    g_rev = 0.0;
    for (const auto& a : arrivals_) {
        const double delta = t - a.onset;
        if (delta < 0.0) continue;
        const double x = delta / a.tau;
        const double gi = a.gsyn_bar * x * std::exp(-x);
        g += gi;
        g_rev += gi * a.e_syn;
    }
}

void DrivenCell::prune(double t) {
    std::erase_if(arrivals_, [t](const SynapticArrival& a) {
        return t - a.onset > kKernelHorizon * a.tau;
    });
}

std::optional<double> DrivenCell::step(double t, double dt, double injected_density,
                                       Integrator scheme) {
    StepDrive drive;
    drive.i_inject = {injected_density, injected_density, injected_density};
    if (!arrivals_.empty()) {
        conductance_at(t, drive.g_syn[0], drive.g_syn_rev[0]);
        conductance_at(t + 0.5 * dt, drive.g_syn[1], drive.g_syn_rev[1]);
        conductance_at(t + dt, drive.g_syn[2], drive.g_syn_rev[2]);
        if (++steps_since_prune_ >= kPruneInterval) {
            prune(t);
            steps_since_prune_ = 0;
        }
    }
    state_ = integrate_step(state_, *params_, drive, dt, scheme, id_, t);
    return detector_.feed(t + dt, state_.v_s);
}

IsolatedResponse isolated_response(const NeuronParams& params, bool stimulated, const SimConfig& cfg) {
    cfg.validate();
    IsolatedResponse out;
    DrivenCell cell(params, resting_state(params), cfg.spike_threshold);
    const double i_stim = injected_density(cfg.stimulus.amplitude_pa, params);
    const long n = cfg.steps();
    if (cfg.record_traces) {
        out.trace.reserve(static_cast<std::size_t>(n) + 1);
        out.trace.push_back(cell.state().v_s);
    }
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double i = stimulated && cfg.stimulus.active(t, cfg.dt) ? i_stim : 0.0;
        if (auto s = cell.step(t, cfg.dt, i, cfg.scheme)) out.spikes.push_back(*s);
        if (cfg.record_traces) out.trace.push_back(cell.state().v_s);
    }
    if (auto s = cell.finish()) out.spikes.push_back(*s);
    return out;
}

std::vector<double> simulate_driven_cell(const NeuronParams& params,
                                         std::span<const SynapticArrival> arrivals,
                                         const SimConfig& cfg, bool stop_at_first_spike) {
    cfg.validate();
    DrivenCell cell(params, resting_state(params), cfg.spike_threshold);
    for (const auto& a : arrivals) cell.add_arrival(a);
    std::vector<double> spikes;
    const long n = cfg.steps();
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        if (auto s = cell.step(t, cfg.dt, 0.0, cfg.scheme)) {
            spikes.push_back(*s);
            if (stop_at_first_spike) return spikes;
        }
    }
    if (auto s = cell.finish()) spikes.push_back(*s);
    return spikes;
}

SpikeRecord simulate_network(const BioNetwork& net, std::span<const std::uint8_t> input_pattern,
                             const SimConfig& cfg) {
    net.validate();
    cfg.validate();
    if (input_pattern.size() != static_cast<std::size_t>(net.n_input)) {
        throw PreconditionError("simulate_network: pattern has " +
                                std::to_string(input_pattern.size()) + " bits for " +
                                std::to_string(net.n_input) + " inputs");
    }
    const auto n_neurons = static_cast<std::size_t>(net.size());
    std::vector<std::vector<std::pair<int, int>>> outgoing(n_neurons);  // (post, synapse)
    std::vector<int> in_degree(n_neurons, 0);
    for (const auto& e : net.edges) {
        outgoing[static_cast<std::size_t>(e.pre)].emplace_back(e.post, e.synapse);
        ++in_degree[static_cast<std::size_t>(e.post)];
    }
    auto stimulated = [&](std::size_t id) {
        return id < input_pattern.size() && input_pattern[id] != 0;
    };

    SpikeRecord rec;
    rec.duration = cfg.duration;
    if (cfg.record_traces) {
        rec.traces.resize(n_neurons);
        rec.trace_dt = cfg.dt;
    }

    std::vector<DrivenCell> cells;
    std::vector<std::size_t> driven_ids;
    std::vector<std::pair<int, double>> pending;  // (neuron, peak time)

    // Cells without afferents follow a trajectory fixed by (type, stimulated).
    std::map<std::pair<int, bool>, IsolatedResponse> isolated_cache;
    for (std::size_t id = 0; id < n_neurons; ++id) {
        const int type = net.neuron_types[id];
        const auto& params = net.neuron_library[static_cast<std::size_t>(type)];
        if (in_degree[id] == 0) {
            const auto key = std::make_pair(type, stimulated(id));
            auto it = isolated_cache.find(key);
            if (it == isolated_cache.end()) {
                it = isolated_cache.emplace(key, isolated_response(params, key.second, cfg)).first;
            }
            for (double t : it->second.spikes) pending.emplace_back(static_cast<int>(id), t);
            if (cfg.record_traces) rec.traces[id] = it->second.trace;
        } else {
            driven_ids.push_back(id);
            cells.emplace_back(params, resting_state(params), cfg.spike_threshold,
                               static_cast<int>(id));
            if (cfg.record_traces) rec.traces[id].push_back(cells.back().state().v_s);
        }
    }
    std::vector<int> cell_index(n_neurons, -1);
    for (std::size_t c = 0; c < driven_ids.size(); ++c) cell_index[driven_ids[c]] = static_cast<int>(c);

    auto emit = [&](int neuron, double t_peak) {
        rec.events.push_back(SpikeEvent{neuron, t_peak});
        for (const auto& [post, syn] : outgoing[static_cast<std::size_t>(neuron)]) {
            const int c = cell_index[static_cast<std::size_t>(post)];
            if (c < 0) continue;
            const auto& s = net.synapse_library[static_cast<std::size_t>(syn)];
            cells[static_cast<std::size_t>(c)].add_arrival(
                SynapticArrival{t_peak + s.delay, s.gsyn_bar, s.tau, s.e_syn});
        }
    };
    for (const auto& [neuron, t] : pending) emit(neuron, t);
    pending.clear();

    const long n_steps = cfg.steps();
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const bool pulse_on = cfg.stimulus.active(t, cfg.dt);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::size_t id = driven_ids[c];
            double i = 0.0;
            if (pulse_on && stimulated(id)) {
                i = injected_density(cfg.stimulus.amplitude_pa,
                                     net.neuron_library[static_cast<std::size_t>(net.neuron_types[id])]);
            }
            if (auto s = cells[c].step(t, cfg.dt, i, cfg.scheme)) {
                pending.emplace_back(static_cast<int>(id), *s);
            }
            if (cfg.record_traces) rec.traces[id].push_back(cells[c].state().v_s);
        }
        // Spikes found in this step are delivered after every cell has moved,
        // so results do not depend on the iteration order.
        for (const auto& [neuron, tp] : pending) emit(neuron, tp);
        pending.clear();
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (auto s = cells[c].finish()) rec.events.push_back(SpikeEvent{static_cast<int>(driven_ids[c]), *s});
    }

    if (cfg.cutoff_time) {
        const double cut = *cfg.cutoff_time;
        std::erase_if(rec.events, [cut](const SpikeEvent& e) { return e.time >= cut; });
    }
    std::sort(rec.events.begin(), rec.events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
        return a.time != b.time ? a.time < b.time : a.neuron < b.neuron;
    });
    return rec;
}

std::vector<std::uint8_t> apply_cutoff(const SpikeRecord& rec, double t_cut,
                                       std::span<const int> outputs) {
    if (t_cut > rec.duration) throw PreconditionError("apply_cutoff: t_cut exceeds the record duration");
    std::vector<std::uint8_t> bits(outputs.size(), 0);
    std::map<int, std::size_t> slot;
    for (std::size_t k = 0; k < outputs.size(); ++k) slot.emplace(outputs[k], k);
    for (const auto& e : rec.events) {
        if (e.time >= t_cut) continue;
        if (auto it = slot.find(e.neuron); it != slot.end()) bits[it->second] = 1;
    }
    return bits;
}

}  // namespace biohybrid::biophys

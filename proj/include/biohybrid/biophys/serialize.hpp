#pragma once

#include "json.hpp"

#include "biohybrid/biophys/network.hpp"
#include "biohybrid/biophys/random_network_study.hpp"
#include "biohybrid/biophys/simulate.hpp"
#include "biohybrid/biophys/spikes.hpp"

namespace biohybrid::biophys {

// Network JSON:
//   {"n_input", "n_output", "sparsity", "recurrent", "seed",
//    "neurons": [library index per neuron],
//    "edges": [[pre, post, synapse index], ...],
//    "edge_classes": [class name per edge],
//    "neuron_library": [{param: value}], "synapse_library": [{param: value}]}
nlohmann::json to_json(const NeuronParams& p);
nlohmann::json to_json(const SynapseParams& s);
nlohmann::json to_json(const BioNetwork& net);
BioNetwork network_from_json(const nlohmann::json& j);

// Spike record JSON: {"duration", "events": [[neuron, time], ...]} plus
// optional {"trace_dt", "traces"}.
nlohmann::json to_json(const SpikeRecord& rec);
SpikeRecord spike_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SimConfig& cfg);
nlohmann::json to_json(const SecondarySpikeReport& rep);

}  // namespace biohybrid::biophys

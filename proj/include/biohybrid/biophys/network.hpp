#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "biohybrid/biophys/params.hpp"

namespace biohybrid::biophys {

enum class EdgeClass : std::uint8_t { InputOutput = 0, InputInput, OutputOutput, OutputInput };

constexpr std::array<EdgeClass, 4> kEdgeClasses = {EdgeClass::InputOutput, EdgeClass::InputInput,
                                                   EdgeClass::OutputOutput, EdgeClass::OutputInput};

std::string_view to_string(EdgeClass c);
EdgeClass parse_edge_class(std::string_view name);

struct Edge {
    int pre = 0;
    int post = 0;
    int synapse = 0;  // index into BioNetwork::synapse_library
    EdgeClass cls = EdgeClass::InputOutput;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed excitatory network. Neuron ids 0..n_input-1 are inputs,
// n_input..n_input+n_output-1 are outputs.
struct BioNetwork {
    int n_input = 0;
    int n_output = 0;
    double sparsity = 0.0;
    bool recurrent = false;
    std::uint64_t seed = 0;
    std::vector<int> neuron_types;  // index into neuron_library, one per neuron
    std::vector<Edge> edges;
    std::vector<NeuronParams> neuron_library;
    std::vector<SynapseParams> synapse_library;

    int size() const noexcept { return n_input + n_output; }
    bool is_input(int id) const noexcept { return id < n_input; }
    int output_id(int k) const noexcept { return n_input + k; }
    std::vector<int> output_ids() const;

    std::size_t count(EdgeClass c) const;
    // Realized input->output pairs divided by n_input * n_output.
    double realized_sparsity() const;

    void validate() const;

    friend bool operator==(const BioNetwork&, const BioNetwork&) = default;
};

// Random network: every possible input->output pair is connected independently
// with probability `sparsity`; with `recurrent`, the input->input,
// output->output and output->input blocks are populated the same way (no
// self-edges). Each neuron and each edge draws its parameters uniformly, with
// replacement, from the libraries.
//
// The input->output block and the neuron draws come from sub-streams that do
// not depend on `recurrent`, so a recurrent network built from the same seed
// is a strict superset of its feedforward twin. `recurrent_sparsity`, when
// given, replaces `sparsity` for the three recurrent blocks.
BioNetwork build_bio_network(int n_input, int n_output, double sparsity, bool recurrent,
                             std::span<const NeuronParams> neuron_library,
                             std::span<const SynapseParams> synapse_library, std::uint64_t seed,
                             std::optional<double> recurrent_sparsity = std::nullopt);

// Same, drawing from the fitted libraries.
BioNetwork build_bio_network(int n_input, int n_output, double sparsity, bool recurrent,
                             std::uint64_t seed);

// Copy of `net` with every edge outside the input->output block removed.
BioNetwork feedforward_part(const BioNetwork& net);

}  // namespace biohybrid::biophys

#include "biohybrid/biophys/network.hpp"

#include <algorithm>
#include <string>

#include "biohybrid/errors.hpp"
#include "biohybrid/random.hpp"

namespace biohybrid::biophys {

namespace {

enum Stream : std::uint64_t {
    kStreamNeurons = 1,
    kStreamFeedforward = 2,
    kStreamRecurrent = 3,
};

}  // namespace

std::string_view to_string(EdgeClass c) {
    switch (c) {
        case EdgeClass::InputOutput: return "input-output";
        case EdgeClass::InputInput: return "input-input";
        case EdgeClass::OutputOutput: return "output-output";
        case EdgeClass::OutputInput: return "output-input";
    }
    return "?";
}

EdgeClass parse_edge_class(std::string_view name) {
    for (EdgeClass c : kEdgeClasses) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown edge class '" + std::string(name) + "'");
}

std::vector<int> BioNetwork::output_ids() const {
    std::vector<int> ids(static_cast<std::size_t>(n_output));
    for (int k = 0; k < n_output; ++k) ids[static_cast<std::size_t>(k)] = output_id(k);
    return ids;
}

std::size_t BioNetwork::count(EdgeClass c) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [c](const Edge& e) { return e.cls == c; }));
}

double BioNetwork::realized_sparsity() const {
    const double pairs = static_cast<double>(n_input) * static_cast<double>(n_output);
    return pairs > 0.0 ? static_cast<double>(count(EdgeClass::InputOutput)) / pairs : 0.0;
}

void BioNetwork::validate() const {
    if (n_input < 0 || n_output < 0) throw ConfigError("network sizes must be non-negative");
    if (neuron_types.size() != static_cast<std::size_t>(size())) {
        throw ConfigError("network has " + std::to_string(neuron_types.size()) +
                          " neuron types for " + std::to_string(size()) + " neurons");
    }
    if (neuron_library.empty() || synapse_library.empty()) {
        throw ConfigError("network libraries must be non-empty");
    }
    for (const auto& p : neuron_library) p.validate();
    for (const auto& s : synapse_library) s.validate();
    for (int t : neuron_types) {
        if (t < 0 || static_cast<std::size_t>(t) >= neuron_library.size()) {
            throw ConfigError("neuron type index out of range");
        }
    }
    for (const auto& e : edges) {
        if (e.pre < 0 || e.pre >= size() || e.post < 0 || e.post >= size()) {
            throw ConfigError("edge endpoint out of range");
        }
        if (e.pre == e.post) throw ConfigError("self-edge on neuron " + std::to_string(e.pre));
        if (e.synapse < 0 || static_cast<std::size_t>(e.synapse) >= synapse_library.size()) {
            throw ConfigError("edge synapse index out of range");
        }
        const bool pre_in = is_input(e.pre), post_in = is_input(e.post);
        const EdgeClass expected = pre_in ? (post_in ? EdgeClass::InputInput : EdgeClass::InputOutput)
                                          : (post_in ? EdgeClass::OutputInput : EdgeClass::OutputOutput);
        if (e.cls != expected) throw ConfigError("edge class does not match its endpoints");
    }
}

BioNetwork build_bio_network(int n_input, int n_output, double sparsity, bool recurrent,
                             std::span<const NeuronParams> neuron_library,
                             std::span<const SynapseParams> synapse_library, std::uint64_t seed,
                             std::optional<double> recurrent_sparsity) {
    if (!(sparsity > 0.0 && sparsity <= 1.0)) {
        throw PreconditionError("build_bio_network: sparsity must lie in (0, 1]");
    }
    const double rec_p = recurrent_sparsity.value_or(sparsity);
    if (!(rec_p >= 0.0 && rec_p <= 1.0)) {
        throw PreconditionError("build_bio_network: recurrent sparsity must lie in [0, 1]");
    }
    if (neuron_library.empty() || synapse_library.empty()) {
        throw ConfigError("build_bio_network: neuron and synapse libraries must be non-empty");
    }
    if (n_input < 0 || n_output < 0) throw PreconditionError("build_bio_network: negative size");

    BioNetwork net;
    net.n_input = n_input;
    net.n_output = n_output;
    net.sparsity = sparsity;
    net.recurrent = recurrent;
    net.seed = seed;
    net.neuron_library.assign(neuron_library.begin(), neuron_library.end());
    net.synapse_library.assign(synapse_library.begin(), synapse_library.end());

    Rng neuron_rng = make_rng(seed, kStreamNeurons);
    net.neuron_types.resize(static_cast<std::size_t>(net.size()));
    for (int& t : net.neuron_types) {
        t = static_cast<int>(uniform_index(neuron_rng, neuron_library.size()));
    }

    // One uniform for inclusion and one for the synapse type per candidate
    // pair, so edge inclusion and synapse assignment never shift each other.
    auto fill_block = [&](Rng& rng, int pre_begin, int pre_end, int post_begin, int post_end,
                          EdgeClass cls, double prob) {
        for (int pre = pre_begin; pre < pre_end; ++pre) {
            for (int post = post_begin; post < post_end; ++post) {
                const double u = uniform01(rng);
                const auto syn = static_cast<int>(uniform_index(rng, synapse_library.size()));
                if (pre == post) continue;
                if (u < prob) net.edges.push_back(Edge{pre, post, syn, cls});
            }
        }
    };

    const int out_begin = n_input, out_end = n_input + n_output;
    Rng ff_rng = make_rng(seed, kStreamFeedforward);
    fill_block(ff_rng, 0, n_input, out_begin, out_end, EdgeClass::InputOutput, sparsity);
    if (recurrent) {
        Rng rec_rng = make_rng(seed, kStreamRecurrent);
        fill_block(rec_rng, 0, n_input, 0, n_input, EdgeClass::InputInput, rec_p);
        fill_block(rec_rng, out_begin, out_end, out_begin, out_end, EdgeClass::OutputOutput, rec_p);
        fill_block(rec_rng, out_begin, out_end, 0, n_input, EdgeClass::OutputInput, rec_p);
    }
    return net;
}

BioNetwork build_bio_network(int n_input, int n_output, double sparsity, bool recurrent,
                             std::uint64_t seed) {
    return build_bio_network(n_input, n_output, sparsity, recurrent, neuron_library(),
                             synapse_library(), seed);
}

BioNetwork feedforward_part(const BioNetwork& net) {
    BioNetwork ff = net;
    ff.recurrent = false;
    std::erase_if(ff.edges, [](const Edge& e) { return e.cls != EdgeClass::InputOutput; });
    return ff;
}

}  // namespace biohybrid::biophys

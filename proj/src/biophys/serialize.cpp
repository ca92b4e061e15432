#include "biohybrid/biophys/serialize.hpp"

#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

using nlohmann::json;

json to_json(const NeuronParams& p) {
    return json{{"c_m", p.c_m},       {"e_leak", p.e_leak},   {"g_leak", p.g_leak},
                {"g_na", p.g_na},     {"g_dr", p.g_dr},       {"g_ahp", p.g_ahp},
                {"g_ca", p.g_ca},     {"g_c_kca", p.g_c_kca}, {"g_couple", p.g_couple},
                {"p_soma", p.p_soma}, {"diameter", p.diameter}, {"e_na", p.e_na},
                {"e_k", p.e_k},       {"e_ca", p.e_ca},       {"kinetics_offset", p.kinetics_offset}};
}

json to_json(const SynapseParams& s) {
    return json{{"gsyn_bar", s.gsyn_bar}, {"tau", s.tau}, {"delay", s.delay}, {"e_syn", s.e_syn}};
}

namespace {

NeuronParams neuron_from_json(const json& j) {
    NeuronParams p;
    p.c_m = j.at("c_m").get<double>();
    p.e_leak = j.at("e_leak").get<double>();
    p.g_leak = j.at("g_leak").get<double>();
    p.g_na = j.at("g_na").get<double>();
    p.g_dr = j.at("g_dr").get<double>();
    p.g_ahp = j.at("g_ahp").get<double>();
    p.g_ca = j.at("g_ca").get<double>();
    p.g_c_kca = j.at("g_c_kca").get<double>();
    p.g_couple = j.value("g_couple", p.g_couple);
    p.p_soma = j.value("p_soma", p.p_soma);
    p.diameter = j.value("diameter", p.diameter);
    p.e_na = j.value("e_na", p.e_na);
    p.e_k = j.value("e_k", p.e_k);
    p.e_ca = j.value("e_ca", p.e_ca);
    p.kinetics_offset = j.value("kinetics_offset", p.kinetics_offset);
    return p;
}

SynapseParams synapse_from_json(const json& j) {
    SynapseParams s;
    s.gsyn_bar = j.at("gsyn_bar").get<double>();
    s.tau = j.at("tau").get<double>();
    s.delay = j.at("delay").get<double>();
    s.e_syn = j.value("e_syn", 0.0);
    return s;
}

}  // namespace

json to_json(const BioNetwork& net) {
    json j;
    j["n_input"] = net.n_input;
    j["n_output"] = net.n_output;
    j["sparsity"] = net.sparsity;
    j["recurrent"] = net.recurrent;
    j["seed"] = net.seed;
    j["neurons"] = net.neuron_types;
    json edges = json::array(), classes = json::array();
    for (const auto& e : net.edges) {
        edges.push_back({e.pre, e.post, e.synapse});
        classes.push_back(std::string(to_string(e.cls)));
    }
    j["edges"] = std::move(edges);
    j["edge_classes"] = std::move(classes);
    j["neuron_library"] = json::array();
    for (const auto& p : net.neuron_library) j["neuron_library"].push_back(to_json(p));
    j["synapse_library"] = json::array();
    for (const auto& s : net.synapse_library) j["synapse_library"].push_back(to_json(s));
    return j;
}

BioNetwork network_from_json(const json& j) {
    BioNetwork net;
    try {
        net.n_input = j.at("n_input").get<int>();
        net.n_output = j.at("n_output").get<int>();
        net.sparsity = j.at("sparsity").get<double>();
        net.recurrent = j.at("recurrent").get<bool>();
        net.seed = j.at("seed").get<std::uint64_t>();
        net.neuron_types = j.at("neurons").get<std::vector<int>>();
        const auto& edges = j.at("edges");
        const json* classes = j.contains("edge_classes") ? &j.at("edge_classes") : nullptr;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            Edge e{edges[k].at(0).get<int>(), edges[k].at(1).get<int>(), edges[k].at(2).get<int>(),
                   EdgeClass::InputOutput};
            if (classes) {
                e.cls = parse_edge_class(classes->at(k).get<std::string>());
            } else {
                const bool pre_in = e.pre < net.n_input, post_in = e.post < net.n_input;
                e.cls = pre_in ? (post_in ? EdgeClass::InputInput : EdgeClass::InputOutput)
                               : (post_in ? EdgeClass::OutputInput : EdgeClass::OutputOutput);
            }
            net.edges.push_back(e);
        }
        if (j.contains("neuron_library")) {
            for (const auto& p : j.at("neuron_library")) net.neuron_library.push_back(neuron_from_json(p));
        } else {
            net.neuron_library.assign(neuron_library().begin(), neuron_library().end());
        }
        if (j.contains("synapse_library")) {
            for (const auto& s : j.at("synapse_library")) net.synapse_library.push_back(synapse_from_json(s));
        } else {
            net.synapse_library.assign(synapse_library().begin(), synapse_library().end());
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("network JSON: ") + ex.what());
    }
    net.validate();
    return net;
}

json to_json(const SpikeRecord& rec) {
    json j;
    j["duration"] = rec.duration;
    json ev = json::array();
    for (const auto& e : rec.events) ev.push_back({e.neuron, e.time});
    j["events"] = std::move(ev);
    if (!rec.traces.empty()) {
        j["trace_dt"] = rec.trace_dt;
        j["traces"] = rec.traces;
    }
    return j;
}

SpikeRecord spike_record_from_json(const json& j) {
    SpikeRecord rec;
    try {
        rec.duration = j.at("duration").get<double>();
        for (const auto& e : j.at("events")) rec.events.push_back(SpikeEvent{e.at(0).get<int>(), e.at(1).get<double>()});
        if (j.contains("traces")) {
            rec.trace_dt = j.at("trace_dt").get<double>();
            rec.traces = j.at("traces").get<std::vector<std::vector<double>>>();
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("spike record JSON: ") + ex.what());
    }
    return rec;
}

json to_json(const SimConfig& cfg) {
    json j{{"dt", cfg.dt},
           {"duration", cfg.duration},
           {"stimulus",
            {{"amplitude_pa", cfg.stimulus.amplitude_pa},
             {"onset_ms", cfg.stimulus.onset_ms},
             {"width_ms", cfg.stimulus.width_ms}}},
           {"seed", cfg.seed},
           {"integrator", cfg.scheme == Integrator::RungeKutta4 ? "rk4" : "euler"},
           {"spike_threshold", cfg.spike_threshold}};
    j["cutoff_time"] = cfg.cutoff_time ? json(*cfg.cutoff_time) : json(nullptr);
    return j;
}

json to_json(const SecondarySpikeReport& rep) {
    json j;
    j["bin_width"] = rep.bin_width;
    j["primary_freq"] = rep.primary_freq;
    j["secondary_freq"] = rep.secondary_freq;
    j["cutoffs"] = rep.cutoffs;
    j["lost_primary"] = rep.lost_primary;
    j["included_secondary"] = rep.included_secondary;
    j["overlap"] = rep.overlap;
    j["best_cutoff"] = rep.best_cutoff;
    j["best_overlap"] = rep.best_overlap;
    j["total_primary"] = rep.total_primary;
    j["total_secondary"] = rep.total_secondary;
    j["added_edges"] = rep.added_edges;
    json images = json::array();
    for (const auto& im : rep.images) {
        images.push_back({{"primary", im.primary},
                          {"secondary", im.secondary},
                          {"recurrent_output_spikes", im.recurrent_total},
                          {"input_spikes_feedforward", im.input_spikes_ff},
                          {"input_spikes_recurrent", im.input_spikes_rec}});
    }
    j["images"] = std::move(images);
    return j;
}

}  // namespace biohybrid::biophys

#include "biohybrid/harness/config.hpp"

#include <cstdlib>
#include <fstream>

#include "biohybrid/biophys/serialize.hpp"
#include "biohybrid/errors.hpp"
#include "biohybrid/harness/presets.hpp"
#include "biohybrid/hybridnet/checkpoint.hpp"
#include "biohybrid/varfit/serialize.hpp"

#ifndef BIOHYBRID_DEFAULT_MNIST_DIR
#define BIOHYBRID_DEFAULT_MNIST_DIR "data/mnist"
#endif

namespace biohybrid::harness {

using nlohmann::json;

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "train") return ExperimentKind::Train;
    if (name == "minprenum") return ExperimentKind::Minprenum;
    if (name == "cutoff-study") return ExperimentKind::CutoffStudy;
    throw ConfigError("unknown experiment kind '" + name + "' (expected train, minprenum or cutoff-study)");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Train: return "train";
        case ExperimentKind::Minprenum: return "minprenum";
        case ExperimentKind::CutoffStudy: return "cutoff-study";
    }
    return "train";
}

void DatasetSpec::validate() const {
    if (train_count == 0) throw ConfigError("dataset: train_count must be >= 1");
    if (train_count > 60000) throw ConfigError("dataset: train_count exceeds the 60000 training images");
    if (!train_equals_test && (test_count == 0 || test_count > 10000)) {
        throw ConfigError("dataset: test_count must lie in [1, 10000]");
    }
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("experiment '" + name + "': at least one seed is required");
    if (threads < 0) throw ConfigError("experiment '" + name + "': threads must be >= 0");
    if (kind == ExperimentKind::Minprenum) {
        if (varfit.minprenum.n_max < 1 || varfit.minprenum.trials < 1 || varfit.fit_trials < 1) {
            throw ConfigError("experiment '" + name + "': minPreNum n_max and trial counts must be >= 1");
        }
        varfit.minprenum.sim.validate();
        return;
    }
    data.validate();
    if (variants.empty()) throw ConfigError("experiment '" + name + "': no variants");
    for (const auto& v : variants) {
        try {
            v.input.pool.validate();
            if (v.input.nin_b && !(*v.input.nin_b > 0.0)) throw ConfigError("nin_b must be > 0");
            v.model.validate();
            v.train.validate();
            const int side = v.input.pool.output_size();
            if (side * side != v.model.n_in) {
                throw ConfigError("pooling yields " + std::to_string(side * side) + " inputs but the model has n_in " +
                                  std::to_string(v.model.n_in));
            }
        } catch (const ConfigError& e) {
            throw ConfigError("experiment '" + name + "', variant '" + v.name + "': " + e.what());
        }
    }
    if (kind == ExperimentKind::CutoffStudy) {
        cutoff.secondary.validate();
        if (cutoff.images == 0) throw ConfigError("experiment '" + name + "': cutoff study needs >= 1 image");
    }
}

std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
    return s;
}

std::filesystem::path default_mnist_dir() {
    if (const char* env = std::getenv("BIOHYBRID_MNIST_DIR"); env && *env) return env;
    return BIOHYBRID_DEFAULT_MNIST_DIR;
}

json to_json(const preprocess::PoolSpec& p) {
    return json{{"filter", p.filter}, {"stride", p.stride}, {"padding", p.padding}, {"threshold", p.binarize_threshold}};
}

json to_json(const InputSpec& s) {
    json j = to_json(s.pool);
    j["nin_b"] = s.nin_b ? json(*s.nin_b) : json(nullptr);
    return j;
}

json to_json(const hybridnet::ModelSpec& m) {
    return json{{"n_in", m.n_in},
                {"n_hidden", m.n_hidden},
                {"n_out", m.n_out},
                {"sparsity", m.sparsity},
                {"weight_init", varfit::to_json(m.weight_init)},
                {"vth", varfit::to_json(m.vth)},
                {"hw_init", varfit::to_json(m.hw_init)},
                {"negative_weight_policy", std::string(to_string(m.negative_weight_policy))}};
}

json to_json(const Variant& v) {
    json t = hybridnet::to_json(v.train);
    t.erase("seed");  // each trial uses its own seed
    return json{{"name", v.name}, {"input", to_json(v.input)}, {"model", to_json(v.model)}, {"train", t}};
}

namespace {

json to_json(const VarfitSettings& v) {
    return json{{"n_max", v.minprenum.n_max},
                {"trials", v.minprenum.trials},
                {"duration", v.minprenum.sim.duration},
                {"sim", biophys::to_json(v.minprenum.sim)},
                {"method", varfit::to_string(v.method)},
                {"mean_weight", v.mean_weight},
                {"vth", v.vth},
                {"fit_trials", v.fit_trials},
                {"policy", std::string(to_string(v.policy))},
                {"grid",
                 {{"mean_lo", v.grid.mean_lo},
                  {"mean_hi", v.grid.mean_hi},
                  {"mean_step", v.grid.mean_step},
                  {"std_lo", v.grid.std_lo},
                  {"std_hi", v.grid.std_hi},
                  {"std_step", v.grid.std_step}}}};
}

json to_json(const CutoffSettings& c) {
    const auto& s = c.secondary;
    json j{{"images", c.images},
           {"n_input", s.n_input},
           {"n_output", s.n_output},
           {"sparsity", s.sparsity},
           {"bin_width", s.bin_width},
           {"match_window", s.match_window},
           {"cutoff_step", s.cutoff_step},
           {"duration", s.sim.duration},
           {"seed", s.seed},
           {"sim", biophys::to_json(s.sim)}};
    j["recurrent_sparsity"] = s.recurrent_sparsity ? json(*s.recurrent_sparsity) : json(nullptr);
    return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& field) {
    if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

void apply_input(const json& j, InputSpec& s) {
    read_opt(j, "filter", s.pool.filter);
    read_opt(j, "stride", s.pool.stride);
    read_opt(j, "padding", s.pool.padding);
    read_opt(j, "threshold", s.pool.binarize_threshold);
    if (j.contains("nin_b")) {
        if (j.at("nin_b").is_null()) {
            s.nin_b.reset();
        } else {
            s.nin_b = j.at("nin_b").get<double>();
        }
    }
}

void apply_model(const json& j, hybridnet::ModelSpec& m) {
    read_opt(j, "n_in", m.n_in);
    read_opt(j, "n_hidden", m.n_hidden);
    read_opt(j, "n_out", m.n_out);
    read_opt(j, "sparsity", m.sparsity);
    if (j.contains("weight_init")) m.weight_init = varfit::normal_spec_from_json(j.at("weight_init"));
    if (j.contains("vth")) m.vth = varfit::normal_spec_from_json(j.at("vth"));
    if (j.contains("hw_init")) m.hw_init = varfit::normal_spec_from_json(j.at("hw_init"));
    if (j.contains("negative_weight_policy")) {
        m.negative_weight_policy = parse_negative_weight_policy(j.at("negative_weight_policy").get<std::string>());
    }
}

void apply_variant(const json& j, Variant& v) {
    read_opt(j, "name", v.name);
    if (j.contains("input")) apply_input(j.at("input"), v.input);
    if (j.contains("model")) apply_model(j.at("model"), v.model);
    if (j.contains("train")) {
        const int threads = v.train.threads;
        v.train = hybridnet::train_config_from_json(j.at("train"), v.train);
        v.train.threads = threads;
    }
}

void apply_varfit(const json& j, VarfitSettings& v) {
    read_opt(j, "n_max", v.minprenum.n_max);
    read_opt(j, "trials", v.minprenum.trials);
    read_opt(j, "duration", v.minprenum.sim.duration);
    if (j.contains("method")) v.method = varfit::parse_expectation_method(j.at("method").get<std::string>());
    read_opt(j, "mean_weight", v.mean_weight);
    read_opt(j, "vth", v.vth);
    read_opt(j, "fit_trials", v.fit_trials);
    if (j.contains("policy")) v.policy = parse_negative_weight_policy(j.at("policy").get<std::string>());
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        read_opt(g, "mean_lo", v.grid.mean_lo);
        read_opt(g, "mean_hi", v.grid.mean_hi);
        read_opt(g, "mean_step", v.grid.mean_step);
        read_opt(g, "std_lo", v.grid.std_lo);
        read_opt(g, "std_hi", v.grid.std_hi);
        read_opt(g, "std_step", v.grid.std_step);
    }
}

void apply_cutoff(const json& j, CutoffSettings& c) {
    auto& s = c.secondary;
    read_opt(j, "images", c.images);
    read_opt(j, "n_input", s.n_input);
    read_opt(j, "n_output", s.n_output);
    read_opt(j, "sparsity", s.sparsity);
    if (j.contains("recurrent_sparsity")) {
        if (j.at("recurrent_sparsity").is_null()) {
            s.recurrent_sparsity.reset();
        } else {
            s.recurrent_sparsity = j.at("recurrent_sparsity").get<double>();
        }
    }
    read_opt(j, "bin_width", s.bin_width);
    read_opt(j, "match_window", s.match_window);
    read_opt(j, "cutoff_step", s.cutoff_step);
    read_opt(j, "duration", s.sim.duration);
    read_opt(j, "seed", s.seed);
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
    json variants = json::array();
    for (const auto& v : cfg.variants) variants.push_back(to_json(v));
    json j{{"name", cfg.name},
           {"kind", to_string(cfg.kind)},
           {"data",
            {{"train_count", cfg.data.train_count},
             {"test_count", cfg.data.test_count},
             {"train_equals_test", cfg.data.train_equals_test},
             {"selection", "first N images in file order"}}},
           {"seeds", cfg.seeds},
           {"trials", cfg.trials()},
           {"threads", cfg.threads},
           {"variants", variants}};
    j["varfit_artifact"] = cfg.varfit_artifact ? json(*cfg.varfit_artifact) : json(nullptr);
    if (cfg.kind == ExperimentKind::Minprenum) j["varfit"] = to_json(cfg.varfit);
    if (cfg.kind == ExperimentKind::CutoffStudy) j["cutoff"] = to_json(cfg.cutoff);
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    try {
        if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
        read_opt(j, "name", cfg.name);
        if (j.contains("kind")) cfg.kind = parse_experiment_kind(j.at("kind").get<std::string>());
        if (j.contains("data")) {
            const auto& d = j.at("data");
            read_opt(d, "train_count", cfg.data.train_count);
            read_opt(d, "test_count", cfg.data.test_count);
            read_opt(d, "train_equals_test", cfg.data.train_equals_test);
        }
        if (j.contains("trials")) cfg.seeds = seed_range(j.at("trials").get<std::size_t>());
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        read_opt(j, "threads", cfg.threads);
        if (j.contains("variants")) {
            const Variant base = cfg.variants.empty() ? Variant{} : cfg.variants.front();
            cfg.variants.clear();
            for (const auto& vj : j.at("variants")) {
                Variant v = base;
                apply_variant(vj, v);
                cfg.variants.push_back(v);
            }
        }
        for (auto& v : cfg.variants) {
            if (j.contains("input")) apply_input(j.at("input"), v.input);
            if (j.contains("model")) apply_model(j.at("model"), v.model);
            if (j.contains("train")) {
                const int threads = v.train.threads;
                v.train = hybridnet::train_config_from_json(j.at("train"), v.train);
                v.train.threads = threads;
            }
        }
        if (j.contains("varfit")) apply_varfit(j.at("varfit"), cfg.varfit);
        if (j.contains("cutoff")) apply_cutoff(j.at("cutoff"), cfg.cutoff);
        if (j.contains("varfit_artifact") && !j.at("varfit_artifact").is_null()) {
            apply_varfit_artifact(cfg, j.at("varfit_artifact").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return experiment_from_json(j);
}

void apply_varfit_artifact(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open varfit artifact " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("varfit artifact " + path.string() + ": " + e.what());
    }
    if (!j.contains("threshold_dist") || !j.contains("weight_dist")) {
        throw ConfigError("varfit artifact " + path.string() + " lacks threshold_dist / weight_dist");
    }
    const auto vth = varfit::normal_spec_from_json(j.at("threshold_dist"));
    const auto w = varfit::normal_spec_from_json(j.at("weight_dist"));
    for (auto& v : cfg.variants) {
        v.model.vth = vth;
        v.model.weight_init = w;
    }
    cfg.varfit_artifact = path.string();
}

}  // namespace biohybrid::harness

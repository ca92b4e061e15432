#include "biohybrid/hybridnet/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::hybridnet {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "biohybrid-checkpoint";
constexpr int kVersion = 1;

json bound_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

double bound_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw ConfigError("estimator bound '" + s + "' is not a number");
    }
    if (j.is_null()) throw ConfigError("estimator bound is null");
    return j.get<double>();
}

}  // namespace

json to_json(const EstimatorConfig& e) { return json{{"lower", bound_to_json(e.lower)}, {"upper", bound_to_json(e.upper)}}; }

EstimatorConfig estimator_from_json(const json& j) {
    EstimatorConfig e;
    if (j.is_array()) {
        e.lower = bound_from_json(j.at(0));
        e.upper = bound_from_json(j.at(1));
    } else {
        if (j.contains("lower")) e.lower = bound_from_json(j.at("lower"));
        if (j.contains("upper")) e.upper = bound_from_json(j.at("upper"));
    }
    e.validate();
    return e;
}

json to_json(const TrainConfig& c) {
    json j{{"lr_bio", c.lr_bio},
           {"lr_hw", c.lr_hw},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"estimator", to_json(c.estimator)},
           {"seed", c.seed},
           {"negative_weight_policy", std::string(to_string(c.negative_weight_policy))},
           {"shuffle", c.shuffle},
           {"cutoff_noise", {{"p_loss", c.noise.p_loss}, {"p_gain", c.noise.p_gain}, {"per_image", c.noise.per_image}}}};
    if (c.adlr) {
        j["adlr"] = json{{"lr0_bio", c.adlr->lr0_bio},
                         {"lr0_hw", c.adlr->lr0_hw},
                         {"decay_rate", c.adlr->decay_rate},
                         {"horizon", c.adlr->horizon},
                         {"staircase", c.adlr->staircase}};
    } else {
        j["adlr"] = nullptr;
    }
    return j;
}

TrainConfig train_config_from_json(const json& j, const TrainConfig& base) {
    TrainConfig c = base;
    try {
        c.lr_bio = j.value("lr_bio", c.lr_bio);
        c.lr_hw = j.value("lr_hw", c.lr_hw);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        if (j.contains("estimator")) c.estimator = estimator_from_json(j.at("estimator"));
        c.seed = j.value("seed", c.seed);
        if (j.contains("negative_weight_policy")) {
            c.negative_weight_policy = parse_negative_weight_policy(j.at("negative_weight_policy").get<std::string>());
        }
        c.shuffle = j.value("shuffle", c.shuffle);
        if (j.contains("cutoff_noise")) {
            c.noise.p_loss = j.at("cutoff_noise").value("p_loss", c.noise.p_loss);
            c.noise.p_gain = j.at("cutoff_noise").value("p_gain", c.noise.p_gain);
            c.noise.per_image = j.at("cutoff_noise").value("per_image", c.noise.per_image);
        }
        if (j.contains("adlr") && j.at("adlr").is_null()) c.adlr.reset();
        if (j.contains("adlr") && !j.at("adlr").is_null()) {
            const auto& a = j.at("adlr");
            AdlrConfig ad = c.adlr.value_or(AdlrConfig{});
            ad.lr0_bio = a.value("lr0_bio", ad.lr0_bio);
            ad.lr0_hw = a.value("lr0_hw", ad.lr0_hw);
            ad.decay_rate = a.value("decay_rate", ad.decay_rate);
            ad.horizon = a.value("horizon", ad.horizon);
            ad.staircase = a.value("staircase", ad.staircase);
            c.adlr = ad;
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("train config JSON: ") + ex.what());
    }
    c.validate();
    return c;
}

json to_json(const EpochRecord& r) {
    return json{{"epoch", r.epoch},
                {"train_loss", r.train_loss},
                {"train_accuracy", r.train_accuracy},
                {"test_accuracy", r.test_accuracy},
                {"test_loss", r.test_loss},
                {"nf_hidden", r.nf_hidden},
                {"f_metric", r.f_metric},
                {"mean_weight", r.mean_weight},
                {"lr_bio", r.lr_bio},
                {"lr_hw", r.lr_hw}};
}

json to_json(const TrainHistory& h) {
    json epochs = json::array();
    for (const auto& r : h.epochs) epochs.push_back(to_json(r));
    return json{{"epochs", epochs}, {"clamped_probabilities", h.clamped_probabilities}};
}

json checkpoint_to_json(const HybridModel& model, const TrainConfig& cfg) {
    return json{{"format", kFormat},
                {"version", kVersion},
                {"bio",
                 {{"n_in", model.bio.n_in},
                  {"n_hidden", model.bio.n_hidden},
                  {"mask", model.bio.mask},
                  {"weights", model.bio.weights},
                  {"init_weights", model.bio.init_weights},
                  {"thresholds", model.bio.thresholds}}},
                {"hw", {{"n_hidden", model.hw.n_hidden}, {"n_out", model.hw.n_out}, {"weights", model.hw.weights}}},
                {"train_config", to_json(cfg)}};
}

HybridModel model_from_checkpoint(const json& j, TrainConfig* cfg) {
    HybridModel m;
    try {
        if (j.value("format", std::string()) != kFormat) throw ConfigError("not a model checkpoint");
        if (j.value("version", 0) != kVersion) throw ConfigError("unsupported checkpoint version");
        const auto& b = j.at("bio");
        m.bio.n_in = b.at("n_in").get<int>();
        m.bio.n_hidden = b.at("n_hidden").get<int>();
        m.bio.mask = b.at("mask").get<std::vector<std::uint8_t>>();
        m.bio.weights = b.at("weights").get<std::vector<double>>();
        m.bio.init_weights = b.at("init_weights").get<std::vector<double>>();
        m.bio.thresholds = b.at("thresholds").get<std::vector<double>>();
        const auto& h = j.at("hw");
        m.hw.n_hidden = h.at("n_hidden").get<int>();
        m.hw.n_out = h.at("n_out").get<int>();
        m.hw.weights = h.at("weights").get<std::vector<double>>();
        if (cfg) *cfg = train_config_from_json(j.at("train_config"));
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("checkpoint JSON: ") + ex.what());
    }
    const auto size = static_cast<std::size_t>(m.bio.n_in) * static_cast<std::size_t>(m.bio.n_hidden);
    if (m.bio.mask.size() != size || m.bio.weights.size() != size || m.bio.init_weights.size() != size ||
        m.bio.thresholds.size() != static_cast<std::size_t>(m.bio.n_hidden) || m.hw.n_hidden != m.bio.n_hidden ||
        m.hw.weights.size() != static_cast<std::size_t>(m.hw.n_hidden) * static_cast<std::size_t>(m.hw.n_out)) {
        throw ConfigError("checkpoint arrays do not match the declared layer sizes");
    }
    if (m.bio.constraint_violations() != 0) throw ConfigError("checkpoint violates the biological-layer constraints");
    return m;
}

void save_checkpoint(const std::filesystem::path& path, const HybridModel& model, const TrainConfig& cfg) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(model, cfg).dump();
}

HybridModel load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + ex.what());
    }
    return model_from_checkpoint(j, cfg);
}

}  // namespace biohybrid::hybridnet

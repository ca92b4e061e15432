#include "biohybrid/harness/presets.hpp"

#include <cstdio>

#include "biohybrid/errors.hpp"

namespace biohybrid::harness {

namespace {

constexpr std::size_t kStudyTrials = 10;

// Full-MNIST schedule. The learning rates and decay are fixed; the epoch
// count and Adlr horizon per hidden size are the best found in single-seed
// tuning runs.
struct FullSchedule {
    int epochs;
    int horizon;
};

FullSchedule full_schedule(int n_hidden) {
    if (n_hidden <= 100) return {20, 5};
    return {12, 4};
}

std::string percent_name(const char* prefix, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
    return buf;
}

ExperimentConfig training_experiment(std::string name, std::size_t images, std::vector<Variant> variants) {
    ExperimentConfig cfg;
    cfg.name = std::move(name);
    cfg.kind = ExperimentKind::Train;
    cfg.data.train_count = images;
    cfg.data.train_equals_test = true;
    cfg.variants = std::move(variants);
    cfg.seeds = seed_range(kStudyTrials);
    return cfg;
}

ExperimentConfig full_mnist(int n_hidden) {
    Variant v = optimization_variant(true, true, true);
    v.name = "hidden-" + std::to_string(n_hidden);
    v.model.n_hidden = n_hidden;
    v.input.nin_b = 26.0;
    v.train.lr_bio = 1e-5;
    v.train.lr_hw = 0.1;
    const auto sched = full_schedule(n_hidden);
    v.train.adlr = hybridnet::AdlrConfig{1e-5, 0.1, 0.2, sched.horizon, false};
    v.train.epochs = sched.epochs;
    ExperimentConfig cfg;
    cfg.name = "full-mnist-" + std::to_string(n_hidden);
    cfg.kind = ExperimentKind::Train;
    cfg.data.train_count = 60000;
    cfg.data.test_count = 10000;
    cfg.data.train_equals_test = false;
    cfg.variants = {v};
    cfg.seeds = seed_range(1);
    return cfg;
}

}  // namespace

Variant variation_study_variant(bool with_variation) {
    Variant v;
    v.name = with_variation ? "var" : "fixed";
    v.model.n_in = 196;
    v.model.n_hidden = 100;
    v.model.n_out = 10;
    v.model.sparsity = 0.4;
    if (with_variation) {
        v.model.vth = {0.0058, 0.0017};
        v.model.weight_init = {0.0007, 0.0007};
    } else {
        v.model.vth = {0.0055, 0.0};
        v.model.weight_init = {0.00072, 0.0};
    }
    v.model.hw_init = {0.0007, 0.0007};
    v.train.lr_bio = 1e-4;
    v.train.lr_hw = 1e-2;
    v.train.epochs = 100;
    v.train.batch_size = 1;
    v.input.pool = preprocess::PoolSpec{};
    return v;
}

Variant optimization_baseline_variant() {
    Variant v = variation_study_variant(true);
    v.name = "baseline";
    v.model.hw_init = {0.0007, 0.03};
    v.train.lr_bio = 5e-6;
    v.train.lr_hw = 0.008;
    return v;
}

Variant optimization_variant(bool adpp, bool estimator, bool adlr) {
    Variant v = optimization_baseline_variant();
    std::string name = "baseline";
    if (adpp) {
        v.input.nin_b = 20.0;
        name = "adpp";
    }
    if (estimator) {
        v.train.estimator = {0.0, 0.0075};
        name += "+est";
    }
    if (adlr) {
        v.train.adlr = hybridnet::AdlrConfig{5e-6, 0.1, 0.2, 0, false};
        name += "+adlr";
    }
    v.name = name;
    return v;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "var-study-fixed", "var-study-var",   "opt-1000",        "sparsity-sweep",
        "adpp-sweep",      "estimator-sweep", "adlr",            "full-mnist-100",
        "full-mnist-500",  "full-mnist-2000", "cutoff-study",    "minprenum"};
    return names;
}

ExperimentConfig preset(const std::string& name) {
    if (name == "var-study-fixed") return training_experiment(name, 100, {variation_study_variant(false)});
    if (name == "var-study-var") return training_experiment(name, 100, {variation_study_variant(true)});
    if (name == "opt-1000") {
        Variant v = optimization_variant(true, true, true);
        v.name = "opt-1000";
        return training_experiment(name, 1000, {v});
    }
    if (name == "adlr") {
        return training_experiment(name, 1000,
                                   {optimization_variant(false, false, false), optimization_variant(true, false, false),
                                    optimization_variant(true, true, false), optimization_variant(true, true, true)});
    }
    if (name == "sparsity-sweep") {
        std::vector<Variant> vs;
        for (int k = 1; k <= 10; ++k) {
            Variant v = optimization_baseline_variant();
            v.model.sparsity = k / 10.0;
            v.name = "sparsity-" + std::to_string(k * 10) + "%";
            vs.push_back(v);
        }
        return training_experiment(name, 1000, vs);
    }
    if (name == "adpp-sweep") {
        std::vector<Variant> vs;
        for (double target : {10.0, 15.0, 20.0, 25.0, 30.0}) {
            Variant v = optimization_baseline_variant();
            v.input.nin_b = target;
            v.name = percent_name("ninb-", target);
            vs.push_back(v);
        }
        return training_experiment(name, 1000, vs);
    }
    if (name == "estimator-sweep") {
        // Ranges centred on the mean threshold 0.0058, then upper bounds only.
        const std::vector<std::pair<double, double>> ranges{
            {0.0048, 0.0068}, {0.0038, 0.0078}, {0.0028, 0.0088}, {0.0, 0.0065},
            {0.0, 0.0075},    {0.0, 0.0085},    {0.0, 0.0100}};
        std::vector<Variant> vs;
        Variant ste = optimization_variant(true, false, false);
        ste.name = "ste";
        vs.push_back(ste);
        for (const auto& [lo, hi] : ranges) {
            Variant v = optimization_variant(true, false, false);
            v.train.estimator = {lo, hi};
            char buf[64];
            std::snprintf(buf, sizeof buf, "est(%g,%g)", lo, hi);
            v.name = buf;
            vs.push_back(v);
        }
        return training_experiment(name, 1000, vs);
    }
    if (name == "full-mnist-100") return full_mnist(100);
    if (name == "full-mnist-500") return full_mnist(500);
    if (name == "full-mnist-2000") return full_mnist(2000);
    if (name == "cutoff-study") {
        Variant clean = variation_study_variant(true);
        clean.name = "no-cutoff";
        Variant noisy = clean;
        noisy.name = "cutoff-noise";
        noisy.train.noise = {0.10, 0.10};
        auto cfg = training_experiment(name, 100, {clean, noisy});
        cfg.kind = ExperimentKind::CutoffStudy;
        cfg.cutoff.images = 5;
        cfg.cutoff.secondary.sim.duration = 60.0;
        cfg.cutoff.secondary.seed = 1;
        return cfg;
    }
    if (name == "minprenum") {
        ExperimentConfig cfg;
        cfg.name = name;
        cfg.kind = ExperimentKind::Minprenum;
        cfg.variants.clear();
        cfg.seeds = {1};
        cfg.varfit.minprenum.n_max = 20;
        cfg.varfit.minprenum.trials = 1000;
        cfg.varfit.fit_trials = 1000;
        return cfg;
    }
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; valid presets: " + valid);
}

}  // namespace biohybrid::harness

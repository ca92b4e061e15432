#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "biohybrid/biophys/random_network_study.hpp"
#include "biohybrid/hybridnet/train.hpp"
#include "biohybrid/preprocess/pooling.hpp"
#include "biohybrid/varfit/minprenum.hpp"

namespace biohybrid::harness {

enum class ExperimentKind {
    Train,        // every variant x seed is trained and evaluated
    Minprenum,    // biophysical minPreNum curves and the variation conversion
    CutoffStudy,  // secondary-spike study plus the Train runs of the variants
};

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

// Subsets are the first N images of the official files in file order.
struct DatasetSpec {
    std::size_t train_count = 100;
    std::size_t test_count = 10000;  // ignored when train_equals_test
    bool train_equals_test = true;

    void validate() const;
    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct InputSpec {
    preprocess::PoolSpec pool;
    // Adpp target. When set, the binarization threshold is chosen on the
    // pooled training images and pool.binarize_threshold is ignored.
    std::optional<double> nin_b;

    friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

struct Variant {
    std::string name = "default";
    InputSpec input;
    hybridnet::ModelSpec model;
    hybridnet::TrainConfig train;
};

// The minPreNum runs use the experiment's first seed.
struct VarfitSettings {
    varfit::MinPreNumOptions minprenum;
    varfit::ExpectationMethod method = varfit::ExpectationMethod::CurveDifference;
    double mean_weight = varfit::kDefaultMeanWeight;
    double vth = 0.0058;
    varfit::FitGrid grid;
    int fit_trials = 1000;
    NegativeWeightPolicy policy = NegativeWeightPolicy::ClampZero;
};

struct CutoffSettings {
    biophys::SecondarySpikeConfig secondary;
    std::size_t images = 5;  // first N training images after preprocessing
};

struct ExperimentConfig {
    std::string name = "custom";
    ExperimentKind kind = ExperimentKind::Train;
    DatasetSpec data;
    std::vector<Variant> variants{Variant{}};
    std::vector<std::uint64_t> seeds{1};
    // Path of a fit-variations artifact whose threshold and weight
    // distributions were copied into every variant's model.
    std::optional<std::string> varfit_artifact;
    VarfitSettings varfit;
    CutoffSettings cutoff;
    int threads = 1;

    std::size_t trials() const noexcept { return seeds.size(); }
    void validate() const;
};

// Seeds first, first + 1, ..., first + count - 1.
std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first = 1);

// Directory used when none is given: $BIOHYBRID_MNIST_DIR, then the build
// default.
std::filesystem::path default_mnist_dir();

nlohmann::json to_json(const preprocess::PoolSpec& p);
nlohmann::json to_json(const InputSpec& s);
nlohmann::json to_json(const hybridnet::ModelSpec& m);
nlohmann::json to_json(const Variant& v);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Config file schema (JSON). Every key is optional:
//   {"preset": name,                 base configuration, defaults otherwise
//    "name", "kind": "train" | "minprenum" | "cutoff-study",
//    "data": {"train_count", "test_count", "train_equals_test"},
//    "seeds": [..] or "trials": n   (trials gives seeds 1..n),
//    "threads": n,
//    "varfit_artifact": path,        threshold_dist / weight_dist into every model
//    "input": {...}, "model": {...}, "train": {...}   overrides for all variants,
//    "variants": [{"name", "input", "model", "train"}, ...]
//                                    replaces the variant list; each entry
//                                    starts from the first base variant,
//    "varfit": {"n_max", "trials", "duration", "method", "mean_weight",
//               "vth", "fit_trials", "policy", "grid": {...}},
//    "cutoff": {"images", "n_input", "n_output", "sparsity",
//               "recurrent_sparsity", "bin_width", "match_window",
//               "cutoff_step", "duration", "seed"}}
// input:  {"filter", "stride", "padding", "threshold", "nin_b"}
// model:  {"n_in", "n_hidden", "n_out", "sparsity", "weight_init", "vth",
//          "hw_init", "negative_weight_policy"}; distributions as
//          {"mean", "std"} or [mean, std]
// train:  the checkpoint TrainConfig keys
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Copies the distributions of a fit-variations artifact into every variant.
void apply_varfit_artifact(ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace biohybrid::harness

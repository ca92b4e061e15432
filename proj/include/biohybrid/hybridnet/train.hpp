#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "biohybrid/hybridnet/model.hpp"
#include "biohybrid/normal_spec.hpp"
#include "biohybrid/preprocess/dataset.hpp"

namespace biohybrid::hybridnet {

struct AdlrConfig {
    double lr0_bio = 5e-6;
    double lr0_hw = 0.1;
    double decay_rate = 0.2;
    int horizon = 0;  // epochs; 0 means the run's epoch count
    bool staircase = false;

    friend bool operator==(const AdlrConfig&, const AdlrConfig&) = default;
};

// Readout noise standing in for an early cutoff: each firing hidden neuron is
// silenced with probability p_loss, and silent neurons fire spuriously so
// that on average p_gain * (firing count) spikes are added.
// With per_image set the draws are a fixed function of the image index, as a
// living network cut off early drops the same spikes each time it sees the
// same image; otherwise they are redrawn on every presentation.
struct CutoffNoise {
    double p_loss = 0.0;
    double p_gain = 0.0;
    bool per_image = false;

    bool enabled() const noexcept { return p_loss > 0.0 || p_gain > 0.0; }
    void validate() const;

    friend bool operator==(const CutoffNoise&, const CutoffNoise&) = default;
};

struct TrainConfig {
    double lr_bio = 1e-4;
    double lr_hw = 1e-2;
    std::optional<AdlrConfig> adlr;
    int epochs = 100;
    int batch_size = 1;
    EstimatorConfig estimator;
    std::uint64_t seed = 0;
    NegativeWeightPolicy negative_weight_policy = NegativeWeightPolicy::ClampZero;
    bool shuffle = true;
    CutoffNoise noise;
    int threads = 1;  // evaluation workers

    void validate() const;
    // Learning rates in effect during `epoch` (0-based).
    double lr_bio_at(int epoch) const;
    double lr_hw_at(int epoch) const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Shape and initial distributions of a hybrid model; one instance is built
// per seed.
struct ModelSpec {
    int n_in = 196;
    int n_hidden = 100;
    int n_out = 10;
    double sparsity = 0.4;
    NormalSpec weight_init{0.0007, 0.0007};
    NormalSpec vth{0.0058, 0.0017};
    NormalSpec hw_init{0.0007, 0.0007};
    NegativeWeightPolicy negative_weight_policy = NegativeWeightPolicy::ClampZero;

    void validate() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

HybridModel build_model(const ModelSpec& spec, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;  // 1-based: metrics after this many passes
    double train_loss = 0.0;      // mean cross entropy during the pass
    double train_accuracy = 0.0;  // online accuracy during the pass
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double nf_hidden = 0.0;  // on the test set
    double f_metric = 0.0;
    double mean_weight = 0.0;
    double lr_bio = 0.0;
    double lr_hw = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t clamped_probabilities = 0;
};

struct EvalResult {
    double accuracy = 0.0;
    double nf_hidden = 0.0;
    double loss = 0.0;
};

// Applies CutoffNoise to a hidden vector in place.
void apply_cutoff_noise(std::vector<std::uint8_t>& h, const CutoffNoise& noise, Rng& rng);

// Forward pass with optional readout noise on the hidden layer.
ForwardCache forward_noisy(const HybridModel& model, std::span<const std::uint8_t> x, const CutoffNoise& noise,
                           Rng& rng);

EvalResult evaluate_model(const HybridModel& model, const preprocess::BinaryDataset& data,
                          const CutoffNoise& noise = {}, std::uint64_t noise_seed = 0, int threads = 1);
double evaluate(const HybridModel& model, const preprocess::BinaryDataset& data);
double nf_hidden(const HybridModel& model, const preprocess::BinaryDataset& data);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Per-example (or mini-batch) SGD with the estimator gate and weight clamp.
// After every epoch the model is evaluated on `test`; pass the training set
// again for train = test studies.
TrainHistory train(HybridModel& model, const preprocess::BinaryDataset& train_set,
                   const preprocess::BinaryDataset& test, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace biohybrid::hybridnet

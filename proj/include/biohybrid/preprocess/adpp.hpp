#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biohybrid/hybridnet/train.hpp"
#include "biohybrid/preprocess/dataset.hpp"

namespace biohybrid::preprocess {

struct AdppCandidate {
    double target_ninb = 0.0;
    int threshold = 0;
    double mean_nin_b = 0.0;
    double accuracy = 0.0;
    double nf_hidden = 0.0;
};

struct AdppResult {
    double best_ninb = 0.0;
    int best_threshold = 0;
    std::vector<AdppCandidate> candidates;
};

// For every candidate Nin_b: binarize the probe at the matching threshold,
// train a fresh model from `spec` for `probe_epochs` (train = test), and
// record the final accuracy and Nf_hidden. The winner has the highest
// accuracy; ties go to Nf_hidden closer to 0.5, then to the earlier candidate.
AdppResult adpp_select_ninb(std::span<const double> candidates, const PooledDataset& probe,
                            const hybridnet::ModelSpec& spec, hybridnet::TrainConfig train_cfg, int probe_epochs = 100,
                            std::uint64_t seed = 0);

// Selection rule on already-measured candidates.
std::size_t select_candidate(std::span<const AdppCandidate> candidates);

}  // namespace biohybrid::preprocess

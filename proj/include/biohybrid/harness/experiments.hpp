#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>

#include "biohybrid/harness/config.hpp"
#include "biohybrid/harness/report.hpp"
#include "biohybrid/preprocess/adpp.hpp"
#include "biohybrid/preprocess/dataset.hpp"

namespace biohybrid::harness {

struct RunOptions {
    std::filesystem::path out_dir;   // report.json and metrics.csv; nothing written when empty
    std::filesystem::path data_dir;  // MNIST IDX files; default_mnist_dir() when empty
    bool save_checkpoints = false;   // one checkpoint per trial under out_dir/checkpoints
    std::function<void(const std::string&)> log;
};

struct PreparedData {
    preprocess::BinaryDataset train;
    preprocess::BinaryDataset test;  // a copy of train when train = test
    double threshold = 0.0;
};

// Loads the subsets described by `data` and binarizes them per `input`.
PreparedData prepare_data(const DatasetSpec& data, const InputSpec& input, const std::filesystem::path& data_dir);

// Runs every (variant, seed) trial of a Train or CutoffStudy config, or the
// minPreNum pipeline. Failed trials are recorded in the report rather than
// aborting the run.
RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// Adpp on the first `probe_count` training images with the first variant's
// model and training settings.
preprocess::AdppResult run_adpp_tune(const ExperimentConfig& cfg, std::span<const double> candidates,
                                     std::size_t probe_count = 100, int probe_epochs = 100,
                                     const std::filesystem::path& data_dir = {});

}  // namespace biohybrid::harness

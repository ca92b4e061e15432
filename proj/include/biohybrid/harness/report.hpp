#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "biohybrid/harness/config.hpp"
#include "biohybrid/hybridnet/train.hpp"

namespace biohybrid::harness {

double mean(std::span<const double> v);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> v);

struct TrialResult {
    std::string variant;
    std::size_t variant_index = 0;
    std::size_t trial = 0;  // position in the seed list
    std::uint64_t seed = 0;
    double threshold = 0.0;  // binarization threshold actually used
    double train_nin_b = 0.0;
    double test_nin_b = 0.0;
    hybridnet::TrainHistory history;
    std::optional<std::string> error;  // set when the trial failed
    double seconds = 0.0;

    bool ok() const noexcept { return !error && !history.epochs.empty(); }
    const hybridnet::EpochRecord& final_epoch() const { return history.epochs.back(); }
};

struct VariantAggregate {
    std::string variant;
    std::size_t trials = 0;  // successful trials contributing
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_nf_hidden = 0.0;
    double std_nf_hidden = 0.0;
    double mean_f_metric = 0.0;
    double std_f_metric = 0.0;
    std::vector<double> mean_accuracy_curve;  // per epoch, over trials
};

struct RunReport {
    nlohmann::json config;  // resolved configuration, presets expanded
    std::string data_dir;
    std::vector<TrialResult> trials;
    std::vector<VariantAggregate> aggregates;
    nlohmann::json results;  // kind-specific output (minPreNum, secondary spikes)
    std::vector<std::string> errors;
    double wall_seconds = 0.0;
};

// Final-epoch statistics per variant, in `order`. Failed trials are skipped.
std::vector<VariantAggregate> aggregate(const std::vector<TrialResult>& trials, const std::vector<std::string>& order);

nlohmann::json to_json(const TrialResult& t);
nlohmann::json to_json(const VariantAggregate& a);
nlohmann::json to_json(const RunReport& r);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Long-format metrics file "variant,trial,seed,epoch,metric,value". Rows are
// written under a lock and flushed immediately, so an interrupted run keeps
// everything up to its last finished epoch.
class MetricsCsv {
public:
    MetricsCsv() = default;
    explicit MetricsCsv(const std::filesystem::path& path);

    bool is_open() const noexcept { return out_.is_open(); }
    void write_epoch(const std::string& variant, std::size_t trial, std::uint64_t seed,
                     const hybridnet::EpochRecord& rec);
    void write_row(const std::string& variant, std::size_t trial, std::uint64_t seed, int epoch,
                   const std::string& metric, double value);

private:
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace biohybrid::harness

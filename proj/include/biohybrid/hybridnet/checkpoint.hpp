#pragma once

#include <filesystem>

#include "json.hpp"

#include "biohybrid/hybridnet/model.hpp"
#include "biohybrid/hybridnet/train.hpp"

namespace biohybrid::hybridnet {

nlohmann::json to_json(const EstimatorConfig& e);
EstimatorConfig estimator_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
// Keys absent from `j` keep their value from `base`; "adlr": null disables
// the schedule.
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base = {});
nlohmann::json to_json(const EpochRecord& r);
nlohmann::json to_json(const TrainHistory& h);

// Checkpoint JSON: {"format": "biohybrid-checkpoint", "version": 1,
//   "bio": {"n_in", "n_hidden", "mask": [0/1 row-major], "weights",
//           "init_weights", "thresholds"},
//   "hw": {"n_hidden", "n_out", "weights"}, "train_config": {...}}
// Infinite estimator bounds are written as the strings "-inf" / "inf".
nlohmann::json checkpoint_to_json(const HybridModel& model, const TrainConfig& cfg);
HybridModel model_from_checkpoint(const nlohmann::json& j, TrainConfig* cfg = nullptr);

void save_checkpoint(const std::filesystem::path& path, const HybridModel& model, const TrainConfig& cfg);
HybridModel load_checkpoint(const std::filesystem::path& path, TrainConfig* cfg = nullptr);

}  // namespace biohybrid::hybridnet

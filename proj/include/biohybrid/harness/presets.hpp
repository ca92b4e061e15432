#pragma once

#include <string>
#include <vector>

#include "biohybrid/harness/config.hpp"

namespace biohybrid::harness {

// Names accepted by preset().
const std::vector<std::string>& preset_names();

// Fully expanded configuration of a named experiment. Throws ConfigError
// listing the valid names for anything else.
ExperimentConfig preset(const std::string& name);

// Building blocks used by the presets.
// 100 images, train = test, 196-100-10, lr_bio 1e-4 / lr_hw 1e-2.
Variant variation_study_variant(bool with_variation);
// 1000 images, lr_bio 5e-6, hardware init N(0.0007, 0.03), lr_hw 0.008,
// no optimization applied.
Variant optimization_baseline_variant();
// optimization_baseline_variant with Adpp Nin_b = 20, estimator (0, 0.0075)
// and Adlr as selected by the flags.
Variant optimization_variant(bool adpp, bool estimator, bool adlr);

}  // namespace biohybrid::harness

#pragma once

#include "json.hpp"

#include "biohybrid/normal_spec.hpp"
#include "biohybrid/varfit/minprenum.hpp"

namespace biohybrid::varfit {

// {"mean": m, "std": s}
nlohmann::json to_json(const NormalSpec& s);
NormalSpec normal_spec_from_json(const nlohmann::json& j);

// {"post_cell", "trials", "n": [1..n_max], "p_fire": [...], "min_counts": [...]}
nlohmann::json to_json(const MinPreNumCurve& c);
MinPreNumCurve curve_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AlignedCurve& a);
nlohmann::json to_json(const WeightFit& f);

}  // namespace biohybrid::varfit

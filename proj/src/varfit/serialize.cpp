#include "biohybrid/varfit/serialize.hpp"

#include <numeric>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::varfit {

using nlohmann::json;

json to_json(const NormalSpec& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

NormalSpec normal_spec_from_json(const json& j) {
    NormalSpec s;
    try {
        if (j.is_array()) {
            s = NormalSpec{j.at(0).get<double>(), j.at(1).get<double>()};
        } else {
            s = NormalSpec{j.at("mean").get<double>(), j.at("std").get<double>()};
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("normal distribution JSON: ") + ex.what());
    }
    s.validate();
    return s;
}

json to_json(const MinPreNumCurve& c) {
    std::vector<int> n(c.p_fire.size());
    std::iota(n.begin(), n.end(), 1);
    json j{{"post_cell", c.post_cell}, {"trials", c.trials}, {"n", n}, {"p_fire", c.p_fire}};
    if (!c.min_counts.empty()) j["min_counts"] = c.min_counts;
    return j;
}

MinPreNumCurve curve_from_json(const json& j) {
    MinPreNumCurve c;
    try {
        c.post_cell = j.at("post_cell").get<int>();
        c.trials = j.at("trials").get<int>();
        c.p_fire = j.at("p_fire").get<std::vector<double>>();
        if (j.contains("min_counts")) c.min_counts = j.at("min_counts").get<std::vector<int>>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("minPreNum curve JSON: ") + ex.what());
    }
    c.validate();
    return c;
}

json to_json(const AlignedCurve& a) {
    return json{{"curve", to_json(a.curve)},
                {"contributors", a.contributors},
                {"reference_peak", a.reference_peak},
                {"peaks", a.peaks},
                {"warnings", a.warnings}};
}

json to_json(const WeightFit& f) {
    return json{{"best", to_json(f.best)},
                {"sse", f.sse},
                {"on_boundary", f.on_boundary},
                {"warnings", f.warnings},
                {"vth", f.vth},
                {"trials", f.trials},
                {"grid",
                 {{"mean", {f.grid.mean_lo, f.grid.mean_hi, f.grid.mean_step}},
                  {"std", {f.grid.std_lo, f.grid.std_hi, f.grid.std_step}}}}};
}

}  // namespace biohybrid::varfit

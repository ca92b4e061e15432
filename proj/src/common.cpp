#include <cmath>
#include <numbers>
#include <string>

#include "biohybrid/errors.hpp"
#include "biohybrid/normal_spec.hpp"
#include "biohybrid/random.hpp"

namespace biohybrid {

double standard_normal(Rng& rng) {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void NormalSpec::validate() const {
    if (!std::isfinite(mean) || !std::isfinite(std) || std < 0.0) {
        throw PreconditionError("NormalSpec requires finite mean and std >= 0 (got N(" +
                                std::to_string(mean) + ", " + std::to_string(this->std) + "))");
    }
}

NegativeWeightPolicy parse_negative_weight_policy(std::string_view name) {
    if (name == "clamp-zero") return NegativeWeightPolicy::ClampZero;
    if (name == "resample") return NegativeWeightPolicy::Resample;
    throw ConfigError("unknown negative weight policy '" + std::string(name) +
                      "' (expected clamp-zero or resample)");
}

std::string_view to_string(NegativeWeightPolicy policy) {
    return policy == NegativeWeightPolicy::ClampZero ? "clamp-zero" : "resample";
}

double sample_normal(const NormalSpec& spec, Rng& rng) {
    if (spec.std == 0.0) return spec.mean;
    return spec.mean + spec.std * standard_normal(rng);
}

double sample_weight(const NormalSpec& spec, NegativeWeightPolicy policy, Rng& rng) {
    if (policy == NegativeWeightPolicy::ClampZero) {
        const double w = sample_normal(spec, rng);
        return w < 0.0 ? 0.0 : w;
    }
    if (spec.std == 0.0) {
        if (spec.mean < 0.0) throw PreconditionError("resample policy with N(mean<0, 0) never yields a weight");
        return spec.mean;
    }
    for (;;) {
        const double w = sample_normal(spec, rng);
        if (w >= 0.0) return w;
    }
}

}  // namespace biohybrid

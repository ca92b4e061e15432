#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biohybrid/biophys/simulate.hpp"
#include "biohybrid/normal_spec.hpp"

namespace biohybrid::varfit {

// Firing probability of a post-synaptic cell against the number of
// simultaneously stimulated presynaptic cells, n = 1..n_max.
struct MinPreNumCurve {
    int post_cell = 0;  // 1-based library index; 0 for synthetic or averaged curves
    int trials = 0;
    std::vector<double> p_fire;  // p_fire[n-1]
    // Per trial, the smallest n at which the cell fired (0 if it never did).
    // Filled by the experiment runners, empty for hand-built curves.
    std::vector<int> min_counts;

    int n_max() const noexcept { return static_cast<int>(p_fire.size()); }
    double at(int n) const { return p_fire.at(static_cast<std::size_t>(n - 1)); }
    void validate() const;
};

enum class ExpectationMethod { CurveDifference, PerTrialMinimum };
ExpectationMethod parse_expectation_method(const std::string& name);
std::string to_string(ExpectationMethod m);

struct MinPreNumOptions {
    int n_max = 20;
    int trials = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
    // Post cell is integrated for this long after the common stimulus; the
    // presynaptic cells always get the stimulus in `sim`.
    biophys::SimConfig sim = default_sim();

    static biophys::SimConfig default_sim();
};

// In trial k a sequence of n_max (presynaptic cell, synapse) pairs is drawn
// uniformly with replacement; the first n pairs form the n-input experiment,
// so every n sees independent uniform draws across trials.
MinPreNumCurve minprenum_curve(int post_cell, const MinPreNumOptions& opt);

// All nine library cells as post cells.
std::vector<MinPreNumCurve> minprenum_curves(const MinPreNumOptions& opt);

// q(n) = max(0, p(n) - p(n-1)) with p(0) = 0, renormalized to sum 1.
std::vector<double> minprenum_mass(const MinPreNumCurve& curve);

// Expected minPreNum. CurveDifference uses minprenum_mass; PerTrialMinimum
// averages the recorded per-trial minimal firing counts over trials that
// fired. Throws UndefinedExpectationError when the cell never fired.
double curve_expectation(const MinPreNumCurve& curve,
                         ExpectationMethod method = ExpectationMethod::CurveDifference);

inline constexpr double kDefaultMeanWeight = 0.0008;

// N(mean(e) * w, std(e) * w), population standard deviation.
NormalSpec derive_threshold_dist(std::span<const double> expectations, double mean_weight = kDefaultMeanWeight);

struct AlignedCurve {
    MinPreNumCurve curve;
    std::vector<int> contributors;  // curves defined at each aligned position
    int reference_peak = 0;         // aligned peak position n
    std::vector<int> peaks;         // mass-peak position of each input curve (0 if excluded)
    std::vector<std::string> warnings;
};

// Shifts every curve so its mass peak (argmax q, ties to smaller n) sits at
// the rounded mean peak position, then averages the aligned p_fire values
// pointwise over the curves defined there. Curves that never fire are
// excluded with a warning.
AlignedCurve align_average_curves(std::span<const MinPreNumCurve> curves);

// Computational analogue: per trial, n_max weights are drawn from
// weight_dist; the n-input neuron fires iff the sum of the first n weights
// exceeds vth.
MinPreNumCurve computational_minprenum_curve(const NormalSpec& weight_dist, double vth, int n_max, int trials,
                                             NegativeWeightPolicy policy, std::uint64_t seed);

struct FitGrid {
    double mean_lo = 0.0001, mean_hi = 0.0020, mean_step = 0.0001;
    double std_lo = 0.0001, std_hi = 0.0020, std_step = 0.0001;

    std::vector<double> means() const;
    std::vector<double> stds() const;
};

struct WeightFit {
    NormalSpec best;
    double sse = 0.0;
    bool on_boundary = false;
    std::vector<std::string> warnings;
    FitGrid grid;
    int trials = 0;
    double vth = 0.0;
};

// Grid search for the weight distribution whose computational curve is
// closest (sum of squared p_fire differences) to `target`. Every grid point
// uses the same seed.
WeightFit fit_weight_dist(const MinPreNumCurve& target, double vth = 0.0058, const FitGrid& grid = {},
                          int trials = 1000, NegativeWeightPolicy policy = NegativeWeightPolicy::ClampZero,
                          std::uint64_t seed = 0);

double mean_of(std::span<const double> v);
double population_std(std::span<const double> v);

}  // namespace biohybrid::varfit

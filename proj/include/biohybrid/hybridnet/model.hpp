#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "biohybrid/normal_spec.hpp"

namespace biohybrid::hybridnet {

inline constexpr double kMinThreshold = 1e-6;
inline constexpr double kClampLow = 0.5;
inline constexpr double kClampHigh = 2.0;
inline constexpr double kProbFloor = 1e-12;

// Hidden error only flows back through neurons whose preactivation lies
// strictly inside (lower, upper).
struct EstimatorConfig {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool passes(double preact) const noexcept { return preact > lower && preact < upper; }
    bool unbounded() const noexcept;
    void validate() const;

    friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

// Input-to-hidden layer with living-network constraints. Matrices are
// row-major n_in x n_hidden, entry (m, n) at m * n_hidden + n.
struct BioLayer {
    int n_in = 0;
    int n_hidden = 0;
    std::vector<std::uint8_t> mask;
    std::vector<double> weights;
    std::vector<double> init_weights;
    std::vector<double> thresholds;

    std::size_t index(int m, int n) const noexcept {
        return static_cast<std::size_t>(m) * static_cast<std::size_t>(n_hidden) + static_cast<std::size_t>(n);
    }
    // Fraction of realized input-hidden pairs.
    double realized_sparsity() const;
    // Mean weight over realized pairs.
    double mean_weight() const;
    double mean_threshold() const;
    // Number of entries violating mask-zero, non-negativity or the
    // [0.5, 2] x init clamp.
    std::size_t constraint_violations() const;
};

// Hidden-to-output layer, row-major n_hidden x n_out.
struct HardwareLayer {
    int n_hidden = 0;
    int n_out = 10;
    std::vector<double> weights;

    std::size_t index(int n, int k) const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(n_out) + static_cast<std::size_t>(k);
    }
};

struct HybridModel {
    BioLayer bio;
    HardwareLayer hw;

    friend bool operator==(const HybridModel& a, const HybridModel& b);
};

struct ForwardCache {
    std::vector<std::uint8_t> x;
    std::vector<int> active;  // indices m with x_m = 1, ascending
    std::vector<double> preact;
    std::vector<std::uint8_t> h;
    std::vector<double> logits;
    std::vector<double> probs;
};

struct Gradients {
    std::vector<double> bio;  // n_in x n_hidden
    std::vector<double> hw;   // n_hidden x n_out
};

// Mask i.i.d. at `sparsity`, weights from weight_dist on realized pairs with
// the negative-weight policy applied, thresholds from vth_dist clamped below
// at kMinThreshold. init_weights is a copy of the resulting weights.
BioLayer init_bio_layer(int n_in, int n_hidden, double sparsity, const NormalSpec& weight_dist,
                        const NormalSpec& vth_dist, NegativeWeightPolicy policy, std::uint64_t seed);
HardwareLayer init_hw_layer(int n_hidden, int n_out, const NormalSpec& dist, std::uint64_t seed);

// preact_n = sum over m (ascending) of x_m * w_mn; h_n = preact_n > Vth_n.
void bio_forward(const BioLayer& layer, std::span<const std::uint8_t> x, std::vector<double>& preact,
                 std::vector<std::uint8_t>& h);
// logits_k = sum over n (ascending) of h_n * W_nk.
std::vector<double> hw_forward(const HardwareLayer& layer, std::span<const std::uint8_t> h);
std::vector<double> softmax(std::span<const double> logits);
// -log(probs[label]) with probs[label] floored at kProbFloor; `clamped` is
// set when the floor was hit.
double cross_entropy(std::span<const double> probs, int label, bool* clamped = nullptr);
// Index of the largest value; the lowest index wins ties.
int predict(std::span<const double> values);

ForwardCache forward(const HybridModel& model, std::span<const std::uint8_t> x);

Gradients backward(const HybridModel& model, const ForwardCache& cache, int label, const EstimatorConfig& est);

// W2 -= lr_hw * g_hw; W1 = clamp(W1 - lr_bio * g_bio, 0.5 init, 2 init) on
// realized pairs.
void apply_updates(HybridModel& model, const Gradients& grads, double lr_bio, double lr_hw);

// backward + apply_updates for one example, touching only rows that can
// change (active inputs, firing hidden neurons). Produces the same model as
// the two-step form.
void sgd_step(HybridModel& model, const ForwardCache& cache, int label, const EstimatorConfig& est, double lr_bio,
              double lr_hw);

// Sums per-example gradients of a mini-batch while touching only the rows
// that can be nonzero. apply() is equivalent to apply_updates with the batch
// mean gradient.
class GradientAccumulator {
public:
    explicit GradientAccumulator(const HybridModel& model);

    void add(const HybridModel& model, const ForwardCache& cache, int label, const EstimatorConfig& est);
    void apply(HybridModel& model, double lr_bio, double lr_hw);
    int count() const noexcept { return count_; }
    // Summed gradients as dense matrices.
    Gradients sum() const;

private:
    int n_in_, n_hidden_, n_out_;
    std::vector<double> bio_, hw_;
    std::vector<std::uint8_t> in_touched_, hid_touched_;
    std::vector<int> in_rows_, hid_rows_;
    int count_ = 0;
};

// lr0 * decay^(epoch / horizon); with `staircase` the exponent is floored.
double adaptive_lr(double lr0, double decay_rate, double epoch, double horizon, bool staircase = false);

// (sparsity * nin_b * mean_w) / vth
double f_metric(double sparsity, double nin_b, double mean_w, double vth);

}  // namespace biohybrid::hybridnet

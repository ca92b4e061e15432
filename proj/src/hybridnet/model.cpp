#include "biohybrid/hybridnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::hybridnet {

namespace {

constexpr std::uint64_t kStreamMask = 11;
constexpr std::uint64_t kStreamWeights = 12;
constexpr std::uint64_t kStreamThresholds = 13;
constexpr std::uint64_t kStreamHardware = 21;

}  // namespace

bool EstimatorConfig::unbounded() const noexcept {
    return std::isinf(lower) && lower < 0 && std::isinf(upper) && upper > 0;
}

void EstimatorConfig::validate() const {
    if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
        throw ConfigError("estimator range must satisfy lower < upper");
    }
}

double BioLayer::realized_sparsity() const {
    if (mask.empty()) return 0.0;
    return static_cast<double>(std::count(mask.begin(), mask.end(), 1)) / static_cast<double>(mask.size());
}

double BioLayer::mean_weight() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!mask[i]) continue;
        sum += weights[i];
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double BioLayer::mean_threshold() const {
    if (thresholds.empty()) return 0.0;
    double sum = 0.0;
    for (double t : thresholds) sum += t;
    return sum / static_cast<double>(thresholds.size());
}

std::size_t BioLayer::constraint_violations() const {
    std::size_t bad = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!mask[i]) {
            bad += w != 0.0 ? 1 : 0;
            continue;
        }
        if (!(w >= 0.0) || w < kClampLow * init_weights[i] || w > kClampHigh * init_weights[i]) ++bad;
    }
    for (double t : thresholds) bad += t > 0.0 ? 0 : 1;
    return bad;
}

bool operator==(const HybridModel& a, const HybridModel& b) {
    return a.bio.n_in == b.bio.n_in && a.bio.n_hidden == b.bio.n_hidden && a.bio.mask == b.bio.mask &&
           a.bio.weights == b.bio.weights && a.bio.init_weights == b.bio.init_weights &&
           a.bio.thresholds == b.bio.thresholds && a.hw.n_hidden == b.hw.n_hidden && a.hw.n_out == b.hw.n_out &&
           a.hw.weights == b.hw.weights;
}

BioLayer init_bio_layer(int n_in, int n_hidden, double sparsity, const NormalSpec& weight_dist,
                        const NormalSpec& vth_dist, NegativeWeightPolicy policy, std::uint64_t seed) {
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw PreconditionError("init_bio_layer: sparsity must lie in (0, 1]");
    if (n_in <= 0 || n_hidden <= 0) throw PreconditionError("init_bio_layer: layer sizes must be positive");
    weight_dist.validate();
    vth_dist.validate();

    BioLayer layer;
    layer.n_in = n_in;
    layer.n_hidden = n_hidden;
    const auto size = static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_hidden);
    layer.mask.assign(size, 0);
    layer.weights.assign(size, 0.0);

    Rng mask_rng = make_rng(seed, kStreamMask);
    for (auto& bit : layer.mask) bit = uniform01(mask_rng) < sparsity ? 1 : 0;

    Rng w_rng = make_rng(seed, kStreamWeights);
    for (std::size_t i = 0; i < size; ++i) {
        if (layer.mask[i]) layer.weights[i] = sample_weight(weight_dist, policy, w_rng);
    }
    layer.init_weights = layer.weights;

    Rng t_rng = make_rng(seed, kStreamThresholds);
    layer.thresholds.resize(static_cast<std::size_t>(n_hidden));
    for (double& t : layer.thresholds) t = std::max(kMinThreshold, sample_normal(vth_dist, t_rng));
    return layer;
}

HardwareLayer init_hw_layer(int n_hidden, int n_out, const NormalSpec& dist, std::uint64_t seed) {
    if (n_hidden <= 0 || n_out <= 0) throw PreconditionError("init_hw_layer: layer sizes must be positive");
    dist.validate();
    HardwareLayer layer;
    layer.n_hidden = n_hidden;
    layer.n_out = n_out;
    layer.weights.resize(static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_out));
    Rng rng = make_rng(seed, kStreamHardware);
    for (double& w : layer.weights) w = sample_normal(dist, rng);
    return layer;
}

void bio_forward(const BioLayer& layer, std::span<const std::uint8_t> x, std::vector<double>& preact,
                 std::vector<std::uint8_t>& h) {
    if (x.size() != static_cast<std::size_t>(layer.n_in)) {
        throw PreconditionError("bio_forward: input has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(layer.n_in));
    }
    const auto nh = static_cast<std::size_t>(layer.n_hidden);
    preact.assign(nh, 0.0);
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (!x[m]) continue;
        // Off-mask weights are exactly 0, so adding them leaves the sum unchanged.
        const double* row = layer.weights.data() + m * nh;
        for (std::size_t n = 0; n < nh; ++n) preact[n] += row[n];
    }
    h.resize(nh);
    for (std::size_t n = 0; n < nh; ++n) h[n] = preact[n] > layer.thresholds[n] ? 1 : 0;
}

std::vector<double> hw_forward(const HardwareLayer& layer, std::span<const std::uint8_t> h) {
    if (h.size() != static_cast<std::size_t>(layer.n_hidden)) throw PreconditionError("hw_forward: hidden size mismatch");
    const auto no = static_cast<std::size_t>(layer.n_out);
    std::vector<double> logits(no, 0.0);
    for (std::size_t n = 0; n < h.size(); ++n) {
        if (!h[n]) continue;
        const double* row = layer.weights.data() + n * no;
        for (std::size_t k = 0; k < no; ++k) logits[k] += row[k];
    }
    return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw PreconditionError("softmax: empty input");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - mx);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const double> probs, int label, bool* clamped) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
        throw PreconditionError("cross_entropy: label out of range");
    }
    double p = probs[static_cast<std::size_t>(label)];
    const bool floor_hit = p < kProbFloor;
    if (floor_hit) p = kProbFloor;
    if (clamped) *clamped = floor_hit;
    return -std::log(p);
}

int predict(std::span<const double> values) {
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

ForwardCache forward(const HybridModel& model, std::span<const std::uint8_t> x) {
    ForwardCache c;
    c.x.assign(x.begin(), x.end());
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (x[m]) c.active.push_back(static_cast<int>(m));
    }
    bio_forward(model.bio, x, c.preact, c.h);
    c.logits = hw_forward(model.hw, c.h);
    c.probs = softmax(c.logits);
    return c;
}

namespace {

// delta_k = probs_k - onehot_k
std::vector<double> output_error(const ForwardCache& cache, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= cache.probs.size()) {
        throw PreconditionError("backward: label out of range");
    }
    std::vector<double> delta(cache.probs);
    delta[static_cast<std::size_t>(label)] -= 1.0;
    return delta;
}

// Gated hidden error: (W2 delta)_n when the estimator passes preact_n, else 0.
std::vector<double> hidden_error(const HybridModel& model, const ForwardCache& cache, const std::vector<double>& delta,
                                 const EstimatorConfig& est) {
    const auto nh = static_cast<std::size_t>(model.hw.n_hidden);
    const auto no = static_cast<std::size_t>(model.hw.n_out);
    std::vector<double> e(nh, 0.0);
    for (std::size_t n = 0; n < nh; ++n) {
        if (!est.passes(cache.preact[n])) continue;
        const double* row = model.hw.weights.data() + n * no;
        double s = 0.0;
        for (std::size_t k = 0; k < no; ++k) s += row[k] * delta[k];
        e[n] = s;
    }
    return e;
}

}  // namespace

Gradients backward(const HybridModel& model, const ForwardCache& cache, int label, const EstimatorConfig& est) {
    const auto nh = static_cast<std::size_t>(model.hw.n_hidden);
    const auto no = static_cast<std::size_t>(model.hw.n_out);
    const auto ni = static_cast<std::size_t>(model.bio.n_in);
    if (cache.preact.size() != nh || cache.h.size() != nh || cache.x.size() != ni || cache.probs.size() != no) {
        throw PreconditionError("backward: cache does not match the model");
    }
    const auto delta = output_error(cache, label);
    Gradients g;
    g.hw.assign(nh * no, 0.0);
    for (std::size_t n = 0; n < nh; ++n) {
        const double hn = cache.h[n] ? 1.0 : 0.0;
        for (std::size_t k = 0; k < no; ++k) g.hw[n * no + k] = hn * delta[k];
    }
    const auto e = hidden_error(model, cache, delta, est);
    g.bio.assign(ni * nh, 0.0);
    for (std::size_t m = 0; m < ni; ++m) {
        if (!cache.x[m]) continue;
        for (std::size_t n = 0; n < nh; ++n) {
            if (model.bio.mask[m * nh + n]) g.bio[m * nh + n] = e[n];
        }
    }
    return g;
}

void apply_updates(HybridModel& model, const Gradients& grads, double lr_bio, double lr_hw) {
    auto& bio = model.bio;
    if (grads.bio.size() != bio.weights.size() || grads.hw.size() != model.hw.weights.size()) {
        throw PreconditionError("apply_updates: gradient shapes do not match the model");
    }
    for (std::size_t i = 0; i < model.hw.weights.size(); ++i) model.hw.weights[i] -= lr_hw * grads.hw[i];
    for (std::size_t i = 0; i < bio.weights.size(); ++i) {
        if (!bio.mask[i]) {
            bio.weights[i] = 0.0;
            continue;
        }
        const double w0 = bio.init_weights[i];
        bio.weights[i] = std::clamp(bio.weights[i] - lr_bio * grads.bio[i], kClampLow * w0, kClampHigh * w0);
    }
}

void sgd_step(HybridModel& model, const ForwardCache& cache, int label, const EstimatorConfig& est, double lr_bio,
              double lr_hw) {
    const auto nh = static_cast<std::size_t>(model.hw.n_hidden);
    const auto no = static_cast<std::size_t>(model.hw.n_out);
    const auto delta = output_error(cache, label);
    const auto e = hidden_error(model, cache, delta, est);

    auto& bio = model.bio;
    for (int m : cache.active) {
        const std::size_t base = static_cast<std::size_t>(m) * nh;
        for (std::size_t n = 0; n < nh; ++n) {
            const std::size_t i = base + n;
            if (!bio.mask[i]) continue;
            const double w0 = bio.init_weights[i];
            bio.weights[i] = std::clamp(bio.weights[i] - lr_bio * e[n], kClampLow * w0, kClampHigh * w0);
        }
    }
    for (std::size_t n = 0; n < nh; ++n) {
        if (!cache.h[n]) continue;
        double* row = model.hw.weights.data() + n * no;
        for (std::size_t k = 0; k < no; ++k) row[k] -= lr_hw * delta[k];
    }
}

GradientAccumulator::GradientAccumulator(const HybridModel& model)
    : n_in_(model.bio.n_in),
      n_hidden_(model.bio.n_hidden),
      n_out_(model.hw.n_out),
      bio_(model.bio.weights.size(), 0.0),
      hw_(model.hw.weights.size(), 0.0),
      in_touched_(static_cast<std::size_t>(model.bio.n_in), 0),
      hid_touched_(static_cast<std::size_t>(model.hw.n_hidden), 0) {}

void GradientAccumulator::add(const HybridModel& model, const ForwardCache& cache, int label,
                              const EstimatorConfig& est) {
    const auto nh = static_cast<std::size_t>(n_hidden_);
    const auto no = static_cast<std::size_t>(n_out_);
    const auto delta = output_error(cache, label);
    const auto e = hidden_error(model, cache, delta, est);
    for (int m : cache.active) {
        if (!in_touched_[static_cast<std::size_t>(m)]) {
            in_touched_[static_cast<std::size_t>(m)] = 1;
            in_rows_.push_back(m);
        }
        const std::size_t base = static_cast<std::size_t>(m) * nh;
        for (std::size_t n = 0; n < nh; ++n) {
            if (model.bio.mask[base + n]) bio_[base + n] += e[n];
        }
    }
    for (std::size_t n = 0; n < nh; ++n) {
        if (!cache.h[n]) continue;
        if (!hid_touched_[n]) {
            hid_touched_[n] = 1;
            hid_rows_.push_back(static_cast<int>(n));
        }
        for (std::size_t k = 0; k < no; ++k) hw_[n * no + k] += delta[k];
    }
    ++count_;
}

void GradientAccumulator::apply(HybridModel& model, double lr_bio, double lr_hw) {
    if (count_ == 0) return;
    const auto nh = static_cast<std::size_t>(n_hidden_);
    const auto no = static_cast<std::size_t>(n_out_);
    const double step_bio = lr_bio / count_;
    const double step_hw = lr_hw / count_;
    auto& bio = model.bio;
    for (int m : in_rows_) {
        const std::size_t base = static_cast<std::size_t>(m) * nh;
        for (std::size_t i = base; i < base + nh; ++i) {
            if (bio.mask[i]) {
                const double w0 = bio.init_weights[i];
                bio.weights[i] = std::clamp(bio.weights[i] - step_bio * bio_[i], kClampLow * w0, kClampHigh * w0);
            }
            bio_[i] = 0.0;
        }
        in_touched_[static_cast<std::size_t>(m)] = 0;
    }
    for (int n : hid_rows_) {
        const std::size_t base = static_cast<std::size_t>(n) * no;
        for (std::size_t i = base; i < base + no; ++i) {
            model.hw.weights[i] -= step_hw * hw_[i];
            hw_[i] = 0.0;
        }
        hid_touched_[static_cast<std::size_t>(n)] = 0;
    }
    in_rows_.clear();
    hid_rows_.clear();
    count_ = 0;
}

Gradients GradientAccumulator::sum() const { return Gradients{bio_, hw_}; }

double adaptive_lr(double lr0, double decay_rate, double epoch, double horizon, bool staircase) {
    if (!(decay_rate > 0.0 && decay_rate < 1.0)) throw PreconditionError("adaptive_lr: decay rate must lie in (0, 1)");
    if (!(horizon >= 1.0)) throw PreconditionError("adaptive_lr: horizon must be >= 1");
    double exponent = epoch / horizon;
    if (staircase) exponent = std::floor(exponent);
    return lr0 * std::pow(decay_rate, exponent);
}

double f_metric(double sparsity, double nin_b, double mean_w, double vth) {
    if (!(vth > 0.0)) throw PreconditionError("f_metric: vth must be > 0");
    return sparsity * nin_b * mean_w / vth;
}

}  // namespace biohybrid::hybridnet

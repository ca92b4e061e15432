#include "biohybrid/hybridnet/train.hpp"

#include <algorithm>
#include <numeric>

#include "biohybrid/errors.hpp"
#include "biohybrid/parallel.hpp"

namespace biohybrid::hybridnet {

namespace {

constexpr std::uint64_t kStreamShuffle = 31;
constexpr std::uint64_t kStreamTrainNoise = 32;
constexpr std::uint64_t kStreamEvalNoise = 33;
constexpr std::size_t kEvalChunk = 256;

void check_dataset(const HybridModel& model, const preprocess::BinaryDataset& data, const char* what) {
    if (data.size() == 0) throw PreconditionError(std::string(what) + ": empty dataset");
    if (data.width != model.bio.n_in) {
        throw PreconditionError(std::string(what) + ": dataset width " + std::to_string(data.width) +
                                " does not match the model input " + std::to_string(model.bio.n_in));
    }
}

}  // namespace

void ModelSpec::validate() const {
    if (n_in <= 0 || n_hidden <= 0 || n_out <= 0) throw ConfigError("model layer sizes must be positive");
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw ConfigError("model sparsity must lie in (0, 1]");
    weight_init.validate();
    vth.validate();
    hw_init.validate();
}

HybridModel build_model(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    HybridModel m;
    m.bio = init_bio_layer(spec.n_in, spec.n_hidden, spec.sparsity, spec.weight_init, spec.vth,
                           spec.negative_weight_policy, seed);
    m.hw = init_hw_layer(spec.n_hidden, spec.n_out, spec.hw_init, seed);
    return m;
}

void CutoffNoise::validate() const {
    if (!(p_loss >= 0.0 && p_loss <= 1.0) || !(p_gain >= 0.0)) {
        throw ConfigError("cutoff noise: p_loss must lie in [0, 1] and p_gain must be >= 0");
    }
}

void TrainConfig::validate() const {
    if (!(lr_bio > 0.0) || !(lr_hw > 0.0)) throw ConfigError("learning rates must be > 0");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    estimator.validate();
    noise.validate();
    if (adlr) {
        if (!(adlr->lr0_bio > 0.0) || !(adlr->lr0_hw > 0.0)) throw ConfigError("Adlr initial rates must be > 0");
        if (!(adlr->decay_rate > 0.0 && adlr->decay_rate < 1.0)) throw ConfigError("Adlr decay rate must lie in (0, 1)");
        if (adlr->horizon < 0) throw ConfigError("Adlr horizon must be >= 0");
    }
}

double TrainConfig::lr_bio_at(int epoch) const {
    if (!adlr) return lr_bio;
    const int horizon = adlr->horizon > 0 ? adlr->horizon : std::max(1, epochs);
    return adaptive_lr(adlr->lr0_bio, adlr->decay_rate, epoch, horizon, adlr->staircase);
}

double TrainConfig::lr_hw_at(int epoch) const {
    if (!adlr) return lr_hw;
    const int horizon = adlr->horizon > 0 ? adlr->horizon : std::max(1, epochs);
    return adaptive_lr(adlr->lr0_hw, adlr->decay_rate, epoch, horizon, adlr->staircase);
}

void apply_cutoff_noise(std::vector<std::uint8_t>& h, const CutoffNoise& noise, Rng& rng) {
    if (!noise.enabled()) return;
    std::size_t firing = 0;
    for (auto b : h) firing += b;
    const std::size_t silent = h.size() - firing;
    const double p_spurious =
        silent == 0 ? 0.0 : std::min(1.0, noise.p_gain * static_cast<double>(firing) / static_cast<double>(silent));
    // Both decisions use the pre-noise state, so lost and added spikes are independent.
    for (auto& b : h) {
        const double u = uniform01(rng);
        if (b) {
            if (u < noise.p_loss) b = 0;
        } else if (u < p_spurious) {
            b = 1;
        }
    }
}

ForwardCache forward_noisy(const HybridModel& model, std::span<const std::uint8_t> x, const CutoffNoise& noise,
                           Rng& rng) {
    if (!noise.enabled()) return forward(model, x);
    ForwardCache c;
    c.x.assign(x.begin(), x.end());
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (x[m]) c.active.push_back(static_cast<int>(m));
    }
    bio_forward(model.bio, x, c.preact, c.h);
    apply_cutoff_noise(c.h, noise, rng);
    c.logits = hw_forward(model.hw, c.h);
    c.probs = softmax(c.logits);
    return c;
}

EvalResult evaluate_model(const HybridModel& model, const preprocess::BinaryDataset& data, const CutoffNoise& noise,
                          std::uint64_t noise_seed, int threads) {
    check_dataset(model, data, "evaluate");
    const std::size_t n = data.size();
    const std::size_t chunks = (n + kEvalChunk - 1) / kEvalChunk;
    struct Partial {
        std::size_t correct = 0;
        std::size_t firing = 0;
        double loss = 0.0;
    };
    std::vector<Partial> parts(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        Partial p;
        const std::size_t end = std::min(n, (c + 1) * kEvalChunk);
        for (std::size_t i = c * kEvalChunk; i < end; ++i) {
            Rng rng = noise.enabled() ? make_rng(noise_seed, i) : Rng();
            const auto fc = forward_noisy(model, data.vectors[i], noise, rng);
            p.correct += predict(fc.probs) == data.labels[i] ? 1 : 0;
            p.firing += static_cast<std::size_t>(std::count(fc.h.begin(), fc.h.end(), 1));
            p.loss += cross_entropy(fc.probs, data.labels[i]);
        }
        parts[c] = p;
    });
    Partial total;
    for (const auto& p : parts) {
        total.correct += p.correct;
        total.firing += p.firing;
        total.loss += p.loss;
    }
    EvalResult r;
    r.accuracy = static_cast<double>(total.correct) / static_cast<double>(n);
    r.nf_hidden = static_cast<double>(total.firing) / (static_cast<double>(n) * model.bio.n_hidden);
    r.loss = total.loss / static_cast<double>(n);
    return r;
}

double evaluate(const HybridModel& model, const preprocess::BinaryDataset& data) {
    return evaluate_model(model, data).accuracy;
}

double nf_hidden(const HybridModel& model, const preprocess::BinaryDataset& data) {
    check_dataset(model, data, "nf_hidden");
    std::size_t firing = 0;
    std::vector<double> preact;
    std::vector<std::uint8_t> h;
    for (const auto& x : data.vectors) {
        bio_forward(model.bio, x, preact, h);
        firing += static_cast<std::size_t>(std::count(h.begin(), h.end(), 1));
    }
    return static_cast<double>(firing) / (static_cast<double>(data.size()) * model.bio.n_hidden);
}

TrainHistory train(HybridModel& model, const preprocess::BinaryDataset& train_set,
                   const preprocess::BinaryDataset& test, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    check_dataset(model, train_set, "train");
    check_dataset(model, test, "train (test set)");

    TrainHistory hist;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(cfg.seed, kStreamShuffle);
    Rng noise_rng = make_rng(cfg.seed, kStreamTrainNoise);
    const std::uint64_t train_noise_seed = derive_seed(cfg.seed, kStreamTrainNoise);
    const bool same_set = train_set.vectors == test.vectors && train_set.labels == test.labels;
    const double sparsity = model.bio.realized_sparsity();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr_bio = cfg.lr_bio_at(epoch);
        const double lr_hw = cfg.lr_hw_at(epoch);
        if (cfg.shuffle) {
            // Fisher-Yates with the library-independent uniform draw.
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
            }
        }
        double loss_sum = 0.0;
        std::size_t correct = 0;
        GradientAccumulator acc(model);
        for (std::size_t idx : order) {
            const int label = train_set.labels[idx];
            if (cfg.noise.per_image) noise_rng = make_rng(train_noise_seed, idx);
            const auto cache = forward_noisy(model, train_set.vectors[idx], cfg.noise, noise_rng);
            bool clamped = false;
            loss_sum += cross_entropy(cache.probs, label, &clamped);
            hist.clamped_probabilities += clamped ? 1 : 0;
            correct += predict(cache.probs) == label ? 1 : 0;
            if (cfg.batch_size == 1) {
                sgd_step(model, cache, label, cfg.estimator, lr_bio, lr_hw);
                continue;
            }
            acc.add(model, cache, label, cfg.estimator);
            if (acc.count() == cfg.batch_size) acc.apply(model, lr_bio, lr_hw);
        }
        acc.apply(model, lr_bio, lr_hw);

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
        std::uint64_t eval_noise_seed = derive_seed(cfg.seed, kStreamEvalNoise + 100 * epoch);
        if (cfg.noise.per_image) eval_noise_seed = same_set ? train_noise_seed : derive_seed(cfg.seed, kStreamEvalNoise);
        const auto ev = evaluate_model(model, test, cfg.noise, eval_noise_seed, cfg.threads);
        rec.test_accuracy = ev.accuracy;
        rec.test_loss = ev.loss;
        rec.nf_hidden = ev.nf_hidden;
        rec.mean_weight = model.bio.mean_weight();
        rec.f_metric = f_metric(sparsity, train_set.mean_nin_b, rec.mean_weight, model.bio.mean_threshold());
        rec.lr_bio = lr_bio;
        rec.lr_hw = lr_hw;
        hist.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return hist;
}

}  // namespace biohybrid::hybridnet

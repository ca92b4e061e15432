#include "biohybrid/preprocess/adpp.hpp"

#include <cmath>

#include "biohybrid/errors.hpp"

namespace biohybrid::preprocess {

std::size_t select_candidate(std::span<const AdppCandidate> candidates) {
    if (candidates.empty()) throw PreconditionError("Adpp: no candidates");
    std::size_t best = 0;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const auto& c = candidates[k];
        const auto& b = candidates[best];
        if (c.accuracy > b.accuracy ||
            (c.accuracy == b.accuracy && std::abs(c.nf_hidden - 0.5) < std::abs(b.nf_hidden - 0.5))) {
            best = k;
        }
    }
    return best;
}

AdppResult adpp_select_ninb(std::span<const double> candidates, const PooledDataset& probe,
                            const hybridnet::ModelSpec& spec, hybridnet::TrainConfig train_cfg, int probe_epochs,
                            std::uint64_t seed) {
    if (candidates.empty()) throw PreconditionError("adpp_select_ninb: no candidates");
    AdppResult res;
    if (candidates.size() == 1) {
        res.best_ninb = candidates[0];
        res.best_threshold = threshold_for_target_ninb(probe, candidates[0]);
        res.candidates.push_back({candidates[0], res.best_threshold, mean_ninb_at(probe, res.best_threshold), 0.0, 0.0});
        return res;
    }
    train_cfg.epochs = probe_epochs;
    train_cfg.seed = seed;
    for (double target : candidates) {
        AdppCandidate c;
        c.target_ninb = target;
        c.threshold = threshold_for_target_ninb(probe, target);
        const auto data = binarize_dataset(probe, c.threshold);
        c.mean_nin_b = data.mean_nin_b;
        auto model = hybridnet::build_model(spec, seed);
        const auto hist = hybridnet::train(model, data, data, train_cfg);
        if (hist.epochs.empty()) {
            const auto ev = hybridnet::evaluate_model(model, data);
            c.accuracy = ev.accuracy;
            c.nf_hidden = ev.nf_hidden;
        } else {
            c.accuracy = hist.epochs.back().test_accuracy;
            c.nf_hidden = hist.epochs.back().nf_hidden;
        }
        res.candidates.push_back(c);
    }
    const auto best = select_candidate(res.candidates);
    res.best_ninb = res.candidates[best].target_ninb;
    res.best_threshold = res.candidates[best].threshold;
    return res;
}

}  // namespace biohybrid::preprocess

#include "biohybrid/biophys/random_network_study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "biohybrid/errors.hpp"
#include "biohybrid/parallel.hpp"

namespace biohybrid::biophys {

void SecondarySpikeConfig::validate() const {
    if (n_input <= 0 || n_output <= 0) throw PreconditionError("secondary-spike study: empty layer");
    if (!(sparsity > 0.0 && sparsity <= 1.0)) {
        throw PreconditionError("secondary-spike study: sparsity must lie in (0, 1]");
    }
    if (!(bin_width > 0.0) || !(cutoff_step > 0.0) || !(match_window >= 0.0)) {
        throw PreconditionError("secondary-spike study: bin width, cutoff step and window must be positive");
    }
    sim.validate();
}

ImageSpikeSplit split_spikes(const SpikeRecord& feedforward, const SpikeRecord& recurrent,
                             int n_input, double match_window) {
    ImageSpikeSplit out;
    std::map<int, std::vector<double>> ff_by_neuron, rec_by_neuron;
    for (const auto& e : feedforward.events) {
        if (e.neuron < n_input) {
            ++out.input_spikes_ff;
            continue;
        }
        ff_by_neuron[e.neuron].push_back(e.time);
        out.primary.push_back(e.time);
    }
    for (const auto& e : recurrent.events) {
        if (e.neuron < n_input) {
            ++out.input_spikes_rec;
            continue;
        }
        rec_by_neuron[e.neuron].push_back(e.time);
        ++out.recurrent_total;
    }
    for (auto& [neuron, rec_times] : rec_by_neuron) {
        std::vector<bool> matched(rec_times.size(), false);
        if (auto it = ff_by_neuron.find(neuron); it != ff_by_neuron.end()) {
            for (double t : it->second) {
                std::size_t best = rec_times.size();
                double best_gap = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < rec_times.size(); ++k) {
                    const double gap = std::abs(rec_times[k] - t);
                    if (!matched[k] && gap <= match_window && gap < best_gap) {
                        best = k;
                        best_gap = gap;
                    }
                }
                if (best < rec_times.size()) matched[best] = true;
            }
        }
        for (std::size_t k = 0; k < rec_times.size(); ++k) {
            if (!matched[k]) out.secondary.push_back(rec_times[k]);
        }
    }
    std::sort(out.primary.begin(), out.primary.end());
    std::sort(out.secondary.begin(), out.secondary.end());
    return out;
}

SecondarySpikeReport secondary_spike_experiment(const SecondarySpikeConfig& cfg,
                                                const std::vector<std::vector<std::uint8_t>>& images,
                                                int threads) {
    cfg.validate();
    if (images.empty()) throw PreconditionError("secondary-spike study: at least one image is required");

    const BioNetwork recurrent = build_bio_network(cfg.n_input, cfg.n_output, cfg.sparsity, true,
                                                   neuron_library(), synapse_library(), cfg.seed,
                                                   cfg.recurrent_sparsity);
    const BioNetwork feedforward = feedforward_part(recurrent);

    SecondarySpikeReport rep;
    rep.bin_width = cfg.bin_width;
    rep.added_edges = recurrent.edges.size() - feedforward.edges.size();
    rep.images.resize(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) {
        const auto ff = simulate_network(feedforward, images[i], cfg.sim);
        const auto rec = simulate_network(recurrent, images[i], cfg.sim);
        rep.images[i] = split_spikes(ff, rec, cfg.n_input, cfg.match_window);
    });

    const double horizon = cfg.sim.cutoff_time.value_or(cfg.sim.duration);
    const auto n_bins = static_cast<std::size_t>(std::ceil(horizon / cfg.bin_width));
    rep.primary_freq.assign(n_bins, 0.0);
    rep.secondary_freq.assign(n_bins, 0.0);
    auto accumulate = [&](const std::vector<double>& times, std::vector<double>& freq) {
        if (times.empty()) return;
        const double w = 1.0 / static_cast<double>(times.size() * images.size());
        for (double t : times) {
            auto b = static_cast<std::size_t>(t / cfg.bin_width);
            freq[std::min(b, n_bins - 1)] += w;
        }
    };
    for (const auto& im : rep.images) {
        accumulate(im.primary, rep.primary_freq);
        accumulate(im.secondary, rep.secondary_freq);
        rep.total_primary += im.primary.size();
        rep.total_secondary += im.secondary.size();
    }

    std::vector<double> all_primary, all_secondary;
    for (const auto& im : rep.images) {
        all_primary.insert(all_primary.end(), im.primary.begin(), im.primary.end());
        all_secondary.insert(all_secondary.end(), im.secondary.begin(), im.secondary.end());
    }
    std::sort(all_primary.begin(), all_primary.end());
    std::sort(all_secondary.begin(), all_secondary.end());

    const auto n_cut = static_cast<std::size_t>(std::floor(horizon / cfg.cutoff_step + 1e-9)) + 1;
    rep.best_overlap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_cut; ++k) {
        const double cut = static_cast<double>(k) * cfg.cutoff_step;
        const auto before_p = static_cast<double>(
            std::lower_bound(all_primary.begin(), all_primary.end(), cut) - all_primary.begin());
        const auto before_s = static_cast<double>(
            std::lower_bound(all_secondary.begin(), all_secondary.end(), cut) - all_secondary.begin());
        const double lost = all_primary.empty() ? 0.0 : 1.0 - before_p / static_cast<double>(all_primary.size());
        const double incl = all_secondary.empty() ? 0.0 : before_s / static_cast<double>(all_secondary.size());
        const double ov = 0.5 * (lost + incl);
        rep.cutoffs.push_back(cut);
        rep.lost_primary.push_back(lost);
        rep.included_secondary.push_back(incl);
        rep.overlap.push_back(ov);
        if (ov < rep.best_overlap) {
            rep.best_overlap = ov;
            rep.best_cutoff = cut;
        }
    }
    return rep;
}

}  // namespace biohybrid::biophys

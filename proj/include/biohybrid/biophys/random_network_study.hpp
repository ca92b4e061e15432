#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "biohybrid/biophys/simulate.hpp"

namespace biohybrid::biophys {

struct SecondarySpikeConfig {
    int n_input = 196;
    int n_output = 100;
    double sparsity = 0.4;
    // Connection probability of the added input->input, output->output and
    // output->input blocks; defaults to `sparsity`.
    std::optional<double> recurrent_sparsity;
    SimConfig sim;
    double bin_width = 1.0;  // ms, histogram resolution
    // A recurrent-run spike is the same spike as a feedforward one when the
    // same output neuron peaks within this window of it.
    double match_window = 1.0;  // ms
    double cutoff_step = 0.5;   // ms, spacing of the candidate cutoff grid
    std::uint64_t seed = 0;

    void validate() const;
};

struct ImageSpikeSplit {
    std::vector<double> primary;    // output spike-peak times in the feedforward run
    std::vector<double> secondary;  // recurrent-run output spikes with no feedforward match
    std::size_t recurrent_total = 0;
    std::size_t input_spikes_ff = 0;
    std::size_t input_spikes_rec = 0;
};

struct SecondarySpikeReport {
    std::vector<ImageSpikeSplit> images;
    // Histogram bins [k*bin_width, (k+1)*bin_width); frequencies are per-image
    // fractions of that image's primary (resp. secondary) spikes, averaged
    // over images.
    double bin_width = 1.0;
    std::vector<double> primary_freq;
    std::vector<double> secondary_freq;
    // For every candidate cutoff: fraction of primary spikes at or after it
    // (lost) and fraction of secondary spikes before it (included), pooled
    // over images; the overlap is their mean.
    std::vector<double> cutoffs;
    std::vector<double> lost_primary;
    std::vector<double> included_secondary;
    std::vector<double> overlap;
    double best_cutoff = 0.0;
    double best_overlap = 0.0;
    std::size_t total_primary = 0;
    std::size_t total_secondary = 0;
    std::size_t added_edges = 0;
};

// Splits recurrent-run output spikes into those matching a feedforward spike
// of the same neuron (primary) and the rest (secondary).
ImageSpikeSplit split_spikes(const SpikeRecord& feedforward, const SpikeRecord& recurrent,
                             int n_input, double match_window);

// Builds a feedforward network and its recurrent-augmented twin from the same
// seed, presents every pattern to both, and summarizes when primary and
// secondary output spikes occur.
SecondarySpikeReport secondary_spike_experiment(const SecondarySpikeConfig& cfg,
                                                const std::vector<std::vector<std::uint8_t>>& images,
                                                int threads = 1);

}  // namespace biohybrid::biophys

#pragma once

#include <optional>
#include <span>
#include <vector>

namespace biohybrid::biophys {

struct SpikeEvent {
    int neuron = 0;
    double time = 0.0;  // spike-peak time, ms

    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

struct SpikeRecord {
    // Sorted by (time, neuron).
    std::vector<SpikeEvent> events;
    double duration = 0.0;
    // Optional somatic voltage traces, one per neuron, sampled every trace_dt
    // starting at t = 0.
    std::vector<std::vector<double>> traces;
    double trace_dt = 0.0;

    std::vector<double> times_of(int neuron) const;
    std::size_t count_of(int neuron) const;
};

// Online threshold-crossing detector. An episode opens when V rises above the
// threshold and closes when it falls back to or below it. The spike-peak time
// is the episode's first local maximum, reported at the first falling sample,
// so a spike is known well before the shortest synaptic delay has elapsed.
class SpikeDetector {
public:
    explicit SpikeDetector(double threshold = 0.0) : threshold_(threshold) {}

    // Feeds one sample; returns the peak time when the peak of the current
    // episode has just been passed.
    std::optional<double> feed(double t, double v);
    // Reports the running maximum of an episode whose peak was not yet passed
    // at the end of the record.
    std::optional<double> finish();

    bool in_episode() const noexcept { return active_; }

private:
    double threshold_;
    bool active_ = false;
    bool reported_ = false;
    double peak_v_ = 0.0;
    double peak_t_ = 0.0;
};

// Peak times of every suprathreshold episode in a trace sampled at fixed dt
// (sample k is at t0 + k*dt).
std::vector<double> detect_spikes(std::span<const double> trace, double dt, double threshold = 0.0,
                                  double t0 = 0.0);

}  // namespace biohybrid::biophys

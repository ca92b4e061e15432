#include "biohybrid/biophys/spikes.hpp"

#include <algorithm>

#include "biohybrid/errors.hpp"

namespace biohybrid::biophys {

std::vector<double> SpikeRecord::times_of(int neuron) const {
    std::vector<double> out;
    for (const auto& e : events) {
        if (e.neuron == neuron) out.push_back(e.time);
    }
    return out;
}

std::size_t SpikeRecord::count_of(int neuron) const {
    return static_cast<std::size_t>(std::count_if(
        events.begin(), events.end(), [neuron](const SpikeEvent& e) { return e.neuron == neuron; }));
}

std::optional<double> SpikeDetector::feed(double t, double v) {
    if (v <= threshold_) {
        active_ = false;
        return std::nullopt;
    }
    if (!active_) {
        active_ = true;
        reported_ = false;
        peak_v_ = v;
        peak_t_ = t;
        return std::nullopt;
    }
    if (reported_) return std::nullopt;
    if (v > peak_v_) {
        peak_v_ = v;
        peak_t_ = t;
        return std::nullopt;
    }
    if (v < peak_v_) {
        reported_ = true;
        return peak_t_;
    }
    return std::nullopt;
}

std::optional<double> SpikeDetector::finish() {
    if (!active_ || reported_) return std::nullopt;
    reported_ = true;
    return peak_t_;
}

std::vector<double> detect_spikes(std::span<const double> trace, double dt, double threshold,
                                  double t0) {
    if (!(dt > 0.0)) throw PreconditionError("detect_spikes: dt must be > 0");
    std::vector<double> peaks;
    SpikeDetector det(threshold);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (auto p = det.feed(t0 + static_cast<double>(k) * dt, trace[k])) peaks.push_back(*p);
    }
    if (auto p = det.finish()) peaks.push_back(*p);
    return peaks;
}

}  // namespace biohybrid::biophys

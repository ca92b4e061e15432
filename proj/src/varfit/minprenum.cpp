#include "biohybrid/varfit/minprenum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "biohybrid/errors.hpp"
#include "biohybrid/parallel.hpp"

namespace biohybrid::varfit {

namespace {

constexpr std::uint64_t kCellStreamStride = 1'000'003;

}  // namespace

void MinPreNumCurve::validate() const {
    if (p_fire.empty()) throw PreconditionError("minPreNum curve: n_max must be >= 1");
    if (trials < 1) throw PreconditionError("minPreNum curve: trials must be >= 1");
    for (double p : p_fire) {
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("minPreNum curve: p_fire outside [0, 1]");
    }
}

ExpectationMethod parse_expectation_method(const std::string& name) {
    if (name == "curve-difference") return ExpectationMethod::CurveDifference;
    if (name == "per-trial-minimum") return ExpectationMethod::PerTrialMinimum;
    throw ConfigError("unknown expectation method '" + name + "' (curve-difference, per-trial-minimum)");
}

std::string to_string(ExpectationMethod m) {
    return m == ExpectationMethod::CurveDifference ? "curve-difference" : "per-trial-minimum";
}

biophys::SimConfig MinPreNumOptions::default_sim() {
    biophys::SimConfig cfg;
    cfg.duration = 60.0;
    return cfg;
}

MinPreNumCurve minprenum_curve(int post_cell, const MinPreNumOptions& opt) {
    const auto neurons = biophys::neuron_library();
    const auto synapses = biophys::synapse_library();
    if (post_cell < 1 || post_cell > static_cast<int>(neurons.size())) {
        throw PreconditionError("minprenum_curve: post cell must lie in 1.." + std::to_string(neurons.size()));
    }
    if (opt.n_max < 1 || opt.trials < 1) throw PreconditionError("minprenum_curve: n_max and trials must be >= 1");
    opt.sim.validate();

    // Each presynaptic cell is stimulated in isolation, so its spike times
    // depend only on its type.
    std::vector<std::vector<double>> pre_spikes(neurons.size());
    for (std::size_t c = 0; c < neurons.size(); ++c) {
        pre_spikes[c] = biophys::isolated_response(neurons[c], true, opt.sim).spikes;
    }

    const auto& post = neurons[static_cast<std::size_t>(post_cell - 1)];
    const auto n_max = static_cast<std::size_t>(opt.n_max);
    std::vector<std::vector<std::uint8_t>> fired(static_cast<std::size_t>(opt.trials));

    parallel_for(fired.size(), opt.threads, [&](std::size_t trial) {
        Rng rng = make_rng(opt.seed, static_cast<std::uint64_t>(post_cell) * kCellStreamStride + trial);
        std::vector<biophys::SynapticArrival> arrivals;
        std::vector<std::uint8_t> row(n_max, 0);
        for (std::size_t n = 0; n < n_max; ++n) {
            const std::size_t pre = uniform_index(rng, neurons.size());
            const auto& syn = synapses[uniform_index(rng, synapses.size())];
            for (double t : pre_spikes[pre]) {
                arrivals.push_back({t + syn.delay, syn.gsyn_bar, syn.tau, syn.e_syn});
            }
            row[n] = biophys::simulate_driven_cell(post, arrivals, opt.sim, true).empty() ? 0 : 1;
        }
        fired[trial] = std::move(row);
    });

    MinPreNumCurve curve;
    curve.post_cell = post_cell;
    curve.trials = opt.trials;
    curve.p_fire.assign(n_max, 0.0);
    curve.min_counts.assign(fired.size(), 0);
    for (std::size_t trial = 0; trial < fired.size(); ++trial) {
        for (std::size_t n = 0; n < n_max; ++n) {
            if (!fired[trial][n]) continue;
            curve.p_fire[n] += 1.0;
            if (curve.min_counts[trial] == 0) curve.min_counts[trial] = static_cast<int>(n + 1);
        }
    }
    for (double& p : curve.p_fire) p /= static_cast<double>(opt.trials);
    return curve;
}

std::vector<MinPreNumCurve> minprenum_curves(const MinPreNumOptions& opt) {
    std::vector<MinPreNumCurve> out;
    for (int c = 1; c <= static_cast<int>(biophys::kNeuronLibrarySize); ++c) out.push_back(minprenum_curve(c, opt));
    return out;
}

std::vector<double> minprenum_mass(const MinPreNumCurve& curve) {
    curve.validate();
    std::vector<double> q(curve.p_fire.size());
    double prev = 0.0, total = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) {
        q[n] = std::max(0.0, curve.p_fire[n] - prev);
        prev = curve.p_fire[n];
        total += q[n];
    }
    if (total <= 0.0) {
        throw UndefinedExpectationError("minPreNum curve of cell " + std::to_string(curve.post_cell) +
                                        " never fires");
    }
    for (double& v : q) v /= total;
    return q;
}

double curve_expectation(const MinPreNumCurve& curve, ExpectationMethod method) {
    if (method == ExpectationMethod::PerTrialMinimum) {
        if (curve.min_counts.empty()) {
            throw PreconditionError("curve_expectation: per-trial minima were not recorded for this curve");
        }
        double sum = 0.0;
        std::size_t fired = 0;
        for (int m : curve.min_counts) {
            if (m > 0) {
                sum += m;
                ++fired;
            }
        }
        if (fired == 0) {
            throw UndefinedExpectationError("minPreNum trials of cell " + std::to_string(curve.post_cell) +
                                            " never fired");
        }
        return sum / static_cast<double>(fired);
    }
    const auto q = minprenum_mass(curve);
    double e = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) e += static_cast<double>(n + 1) * q[n];
    return e;
}

double mean_of(std::span<const double> v) {
    if (v.empty()) throw PreconditionError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

NormalSpec derive_threshold_dist(std::span<const double> expectations, double mean_weight) {
    if (expectations.size() != biophys::kNeuronLibrarySize) {
        throw PreconditionError("derive_threshold_dist: expected one expectation per library cell");
    }
    if (!(mean_weight > 0.0)) throw PreconditionError("derive_threshold_dist: mean_weight must be > 0");
    return NormalSpec{mean_of(expectations) * mean_weight, population_std(expectations) * mean_weight};
}

AlignedCurve align_average_curves(std::span<const MinPreNumCurve> curves) {
    if (curves.empty()) throw PreconditionError("align_average_curves: no curves");
    const int n_max = curves.front().n_max();
    AlignedCurve out;
    std::vector<std::size_t> used;
    double peak_sum = 0.0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        if (curves[c].n_max() != n_max) throw PreconditionError("align_average_curves: curves differ in n_max");
        try {
            const auto q = minprenum_mass(curves[c]);
            // max_element returns the first maximum, i.e. the smallest n.
            const int peak = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin()) + 1;
            out.peaks.push_back(peak);
            peak_sum += peak;
            used.push_back(c);
        } catch (const UndefinedExpectationError&) {
            out.peaks.push_back(0);
            out.warnings.push_back("cell " + std::to_string(curves[c].post_cell) +
                                   " never fires; excluded from the average");
        }
    }
    if (used.empty()) throw UndefinedExpectationError("align_average_curves: no curve ever fires");
    out.reference_peak = static_cast<int>(std::lround(peak_sum / static_cast<double>(used.size())));

    out.curve.post_cell = 0;
    out.curve.trials = curves[used.front()].trials;
    out.curve.p_fire.assign(static_cast<std::size_t>(n_max), 0.0);
    out.contributors.assign(static_cast<std::size_t>(n_max), 0);
    for (std::size_t c : used) {
        const int shift = out.peaks[c] - out.reference_peak;
        for (int n = 1; n <= n_max; ++n) {
            const int src = n + shift;
            if (src < 1 || src > n_max) continue;
            out.curve.p_fire[static_cast<std::size_t>(n - 1)] += curves[c].at(src);
            ++out.contributors[static_cast<std::size_t>(n - 1)];
        }
    }
    for (std::size_t k = 0; k < out.curve.p_fire.size(); ++k) {
        if (out.contributors[k] > 0) out.curve.p_fire[k] /= out.contributors[k];
    }
    // Shift magnitude is below n_max, so the reference column itself is always
    // covered; any uncovered column copies its nearest covered neighbour.
    for (std::size_t k = 0; k < out.curve.p_fire.size(); ++k) {
        if (out.contributors[k] > 0) continue;
        std::size_t best = k;
        for (std::size_t d = 1; d < out.curve.p_fire.size(); ++d) {
            if (k >= d && out.contributors[k - d] > 0) {
                best = k - d;
                break;
            }
            if (k + d < out.curve.p_fire.size() && out.contributors[k + d] > 0) {
                best = k + d;
                break;
            }
        }
        out.curve.p_fire[k] = out.curve.p_fire[best];
        out.warnings.push_back("aligned position " + std::to_string(k + 1) + " has no data; filled from " +
                               std::to_string(best + 1));
    }
    return out;
}

MinPreNumCurve computational_minprenum_curve(const NormalSpec& weight_dist, double vth, int n_max, int trials,
                                             NegativeWeightPolicy policy, std::uint64_t seed) {
    weight_dist.validate();
    if (vth < 0.0) throw PreconditionError("computational_minprenum_curve: vth must be >= 0");
    if (n_max < 1 || trials < 1) throw PreconditionError("computational_minprenum_curve: n_max and trials >= 1");
    MinPreNumCurve curve;
    curve.trials = trials;
    curve.p_fire.assign(static_cast<std::size_t>(n_max), 0.0);
    curve.min_counts.assign(static_cast<std::size_t>(trials), 0);
    Rng rng = make_rng(seed, 0);
    for (int t = 0; t < trials; ++t) {
        double sum = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            sum += sample_weight(weight_dist, policy, rng);
            if (sum > vth) {
                curve.p_fire[static_cast<std::size_t>(n - 1)] += 1.0;
                if (curve.min_counts[static_cast<std::size_t>(t)] == 0) curve.min_counts[static_cast<std::size_t>(t)] = n;
            }
        }
    }
    for (double& p : curve.p_fire) p /= trials;
    return curve;
}

namespace {

std::vector<double> grid_axis(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw PreconditionError("fit grid: empty axis");
    std::vector<double> v;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(lo + static_cast<double>(k) * step);
    return v;
}

}  // namespace

std::vector<double> FitGrid::means() const { return grid_axis(mean_lo, mean_hi, mean_step); }
std::vector<double> FitGrid::stds() const { return grid_axis(std_lo, std_hi, std_step); }

WeightFit fit_weight_dist(const MinPreNumCurve& target, double vth, const FitGrid& grid, int trials,
                          NegativeWeightPolicy policy, std::uint64_t seed) {
    target.validate();
    const auto means = grid.means();
    const auto stds = grid.stds();
    WeightFit fit;
    fit.grid = grid;
    fit.trials = trials;
    fit.vth = vth;
    fit.sse = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        for (std::size_t j = 0; j < stds.size(); ++j) {
            const auto c = computational_minprenum_curve({means[i], stds[j]}, vth, target.n_max(), trials, policy, seed);
            double sse = 0.0;
            for (std::size_t n = 0; n < c.p_fire.size(); ++n) {
                const double d = c.p_fire[n] - target.p_fire[n];
                sse += d * d;
            }
            if (sse < fit.sse) {
                fit.sse = sse;
                best_i = i;
                best_j = j;
            }
        }
    }
    fit.best = NormalSpec{means[best_i], stds[best_j]};
    const bool mean_edge = (best_i == 0 || best_i + 1 == means.size()) && means.size() > 1;
    const bool std_edge = (best_j == 0 || best_j + 1 == stds.size()) && stds.size() > 1;
    fit.on_boundary = mean_edge || std_edge;
    if (fit.on_boundary) {
        fit.warnings.push_back("best weight distribution lies on the search-grid boundary (" +
                               std::string(mean_edge ? "mean" : "std") + ")");
    }
    return fit;
}

}  // namespace biohybrid::varfit

#include "biohybrid/harness/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <tuple>

#include "biohybrid/biophys/serialize.hpp"
#include "biohybrid/errors.hpp"
#include "biohybrid/hybridnet/checkpoint.hpp"
#include "biohybrid/parallel.hpp"
#include "biohybrid/varfit/serialize.hpp"

namespace biohybrid::harness {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void say(const RunOptions& opt, const std::string& msg) {
    if (opt.log) opt.log(msg);
}

struct RawSplits {
    preprocess::RawDataset train;
    preprocess::RawDataset test;  // empty when train = test
};

RawSplits load_raw(const DatasetSpec& data, const std::filesystem::path& dir) {
    data.validate();
    RawSplits raw;
    try {
        raw.train = preprocess::load_mnist(dir, "train").head(data.train_count);
        if (!data.train_equals_test) raw.test = preprocess::load_mnist(dir, "t10k").head(data.test_count);
    } catch (const ParseError& e) {
        throw ParseError(e.kind(), "loading MNIST from " + dir.string() + ": " + e.what(), e.offset());
    }
    return raw;
}

PreparedData binarize_splits(const preprocess::PooledDataset& train, const preprocess::PooledDataset* test,
                             const InputSpec& input) {
    PreparedData out;
    out.threshold = input.nin_b ? preprocess::threshold_for_target_ninb(train, *input.nin_b)
                                : input.pool.binarize_threshold;
    out.train = preprocess::binarize_dataset(train, out.threshold);
    out.test = test ? preprocess::binarize_dataset(*test, out.threshold) : out.train;
    return out;
}

struct PoolKey {
    int filter, stride, padding;
    bool operator<(const PoolKey& o) const {
        return std::tie(filter, stride, padding) < std::tie(o.filter, o.stride, o.padding);
    }
};

json minprenum_pipeline(const ExperimentConfig& cfg, const RunOptions& opt) {
    auto mopt = cfg.varfit.minprenum;
    mopt.seed = cfg.seeds.front();
    mopt.threads = cfg.threads;
    say(opt, "minPreNum: " + std::to_string(mopt.trials) + " trials, n up to " + std::to_string(mopt.n_max));
    const auto curves = varfit::minprenum_curves(mopt);

    json curves_j = json::array();
    std::vector<double> expectations;
    for (const auto& c : curves) {
        json cj = varfit::to_json(c);
        try {
            const double e = varfit::curve_expectation(c, cfg.varfit.method);
            cj["expectation"] = e;
            expectations.push_back(e);
        } catch (const UndefinedExpectationError& e) {
            cj["expectation"] = nullptr;
            cj["warning"] = e.what();
        }
        curves_j.push_back(cj);
    }
    json out{{"curves", curves_j}, {"method", varfit::to_string(cfg.varfit.method)}};
    if (expectations.size() != curves.size()) {
        out["error"] = "some cells never fired; the threshold distribution needs all nine expectations";
        return out;
    }
    out["expectations"] = expectations;
    out["expectation_mean"] = varfit::mean_of(expectations);
    out["expectation_std"] = varfit::population_std(expectations);
    const auto vth = varfit::derive_threshold_dist(expectations, cfg.varfit.mean_weight);
    out["threshold_dist"] = varfit::to_json(vth);

    const auto aligned = varfit::align_average_curves(curves);
    out["aligned"] = varfit::to_json(aligned);
    say(opt, "fitting the weight distribution");
    const auto fit = varfit::fit_weight_dist(aligned.curve, cfg.varfit.vth, cfg.varfit.grid, cfg.varfit.fit_trials,
                                             cfg.varfit.policy, mopt.seed);
    out["weight_fit"] = varfit::to_json(fit);
    out["weight_dist"] = varfit::to_json(fit.best);
    return out;
}

}  // namespace

PreparedData prepare_data(const DatasetSpec& data, const InputSpec& input, const std::filesystem::path& data_dir) {
    input.pool.validate();
    const auto dir = data_dir.empty() ? default_mnist_dir() : data_dir;
    const auto raw = load_raw(data, dir);
    const auto train = preprocess::pool_dataset(raw.train, input.pool);
    if (data.train_equals_test) return binarize_splits(train, nullptr, input);
    const auto test = preprocess::pool_dataset(raw.test, input.pool);
    return binarize_splits(train, &test, input);
}

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    cfg.validate();
    const auto t0 = Clock::now();
    RunReport report;
    report.config = to_json(cfg);
    const auto dir = opt.data_dir.empty() ? default_mnist_dir() : opt.data_dir;
    report.data_dir = dir.string();
    const bool write = !opt.out_dir.empty();
    if (write) std::filesystem::create_directories(opt.out_dir);

    auto finish = [&]() {
        report.wall_seconds = seconds_since(t0);
        if (write) write_json(opt.out_dir / "report.json", to_json(report));
        return report;
    };

    if (cfg.kind == ExperimentKind::Minprenum) {
        report.results = minprenum_pipeline(cfg, opt);
        if (report.results.contains("error")) report.errors.push_back(report.results["error"].get<std::string>());
        if (write && report.results.contains("weight_dist")) {
            write_json(opt.out_dir / "varfit.json",
                       json{{"threshold_dist", report.results["threshold_dist"]},
                            {"weight_dist", report.results["weight_dist"]},
                            {"expectations", report.results["expectations"]}});
        }
        return finish();
    }

    say(opt, "loading MNIST from " + dir.string());
    const auto raw = load_raw(cfg.data, dir);

    // Pool once per distinct pooling geometry, binarize once per variant.
    std::map<PoolKey, std::pair<preprocess::PooledDataset, std::unique_ptr<preprocess::PooledDataset>>> pooled;
    std::vector<PreparedData> prepared;
    for (const auto& v : cfg.variants) {
        const PoolKey key{v.input.pool.filter, v.input.pool.stride, v.input.pool.padding};
        auto it = pooled.find(key);
        if (it == pooled.end()) {
            auto train = preprocess::pool_dataset(raw.train, v.input.pool);
            std::unique_ptr<preprocess::PooledDataset> test;
            if (!cfg.data.train_equals_test) {
                test = std::make_unique<preprocess::PooledDataset>(preprocess::pool_dataset(raw.test, v.input.pool));
            }
            it = pooled.emplace(key, std::make_pair(std::move(train), std::move(test))).first;
        }
        prepared.push_back(binarize_splits(it->second.first, it->second.second.get(), v.input));
    }

    if (cfg.kind == ExperimentKind::CutoffStudy) {
        const auto& bin = prepared.front().train;
        const std::size_t n = std::min(cfg.cutoff.images, bin.size());
        std::vector<std::vector<std::uint8_t>> images(bin.vectors.begin(), bin.vectors.begin() + static_cast<long>(n));
        say(opt, "secondary-spike study on " + std::to_string(n) + " images");
        try {
            const auto rep = biophys::secondary_spike_experiment(cfg.cutoff.secondary, images, cfg.threads);
            report.results["secondary_spikes"] = biophys::to_json(rep);
        } catch (const Error& e) {
            report.errors.push_back(std::string("secondary-spike study: ") + e.what());
        }
    }

    std::unique_ptr<MetricsCsv> csv;
    if (write) csv = std::make_unique<MetricsCsv>(opt.out_dir / "metrics.csv");

    const std::size_t n_jobs = cfg.variants.size() * cfg.seeds.size();
    report.trials.resize(n_jobs);
    const int workers = std::min<int>(resolve_threads(cfg.threads), static_cast<int>(n_jobs));
    // With a single job the spare threads go to evaluation instead.
    const int eval_threads = workers <= 1 ? resolve_threads(cfg.threads) : 1;
    parallel_for(n_jobs, workers, [&](std::size_t job) {
        const std::size_t vi = job / cfg.seeds.size();
        const std::size_t ti = job % cfg.seeds.size();
        const auto& v = cfg.variants[vi];
        const auto& data = prepared[vi];
        TrialResult& r = report.trials[job];
        r.variant = v.name;
        r.variant_index = vi;
        r.trial = ti;
        r.seed = cfg.seeds[ti];
        r.threshold = data.threshold;
        r.train_nin_b = data.train.mean_nin_b;
        r.test_nin_b = data.test.mean_nin_b;
        const auto tj = Clock::now();
        try {
            auto tc = v.train;
            tc.seed = r.seed;
            tc.threads = eval_threads;
            auto model = hybridnet::build_model(v.model, r.seed);
            r.history = hybridnet::train(model, data.train, data.test, tc, [&](const hybridnet::EpochRecord& rec) {
                if (csv) csv->write_epoch(v.name, ti, r.seed, rec);
            });
            if (write && opt.save_checkpoints) {
                hybridnet::save_checkpoint(
                    opt.out_dir / "checkpoints" / (v.name + "_trial" + std::to_string(ti) + "_seed" + std::to_string(r.seed) + ".json"), model, tc);
            }
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        r.seconds = seconds_since(tj);
        if (r.ok()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s seed %llu: accuracy %.4f nf_hidden %.3f (%.1f s)", v.name.c_str(),
                          static_cast<unsigned long long>(r.seed), r.final_epoch().test_accuracy,
                          r.final_epoch().nf_hidden, r.seconds);
            say(opt, buf);
        }
    });

    std::vector<std::string> order;
    for (const auto& v : cfg.variants) order.push_back(v.name);
    for (const auto& t : report.trials) {
        if (t.error) report.errors.push_back(t.variant + " seed " + std::to_string(t.seed) + ": " + *t.error);
    }
    report.aggregates = aggregate(report.trials, order);
    if (cfg.kind == ExperimentKind::CutoffStudy && report.aggregates.size() >= 2) {
        report.results["accuracy_drop_pp"] =
            100.0 * (report.aggregates[0].mean_accuracy - report.aggregates[1].mean_accuracy);
    }
    return finish();
}

preprocess::AdppResult run_adpp_tune(const ExperimentConfig& cfg, std::span<const double> candidates,
                                     std::size_t probe_count, int probe_epochs, const std::filesystem::path& data_dir) {
    if (cfg.variants.empty()) throw ConfigError("adpp-tune: the configuration has no variant");
    const auto& v = cfg.variants.front();
    const auto dir = data_dir.empty() ? default_mnist_dir() : data_dir;
    DatasetSpec probe;
    probe.train_count = probe_count;
    const auto raw = load_raw(probe, dir);
    const auto pooled = preprocess::pool_dataset(raw.train, v.input.pool);
    auto tc = v.train;
    tc.threads = resolve_threads(cfg.threads);
    return preprocess::adpp_select_ninb(candidates, pooled, v.model, tc, probe_epochs, cfg.seeds.front());
}

}  // namespace biohybrid::harness

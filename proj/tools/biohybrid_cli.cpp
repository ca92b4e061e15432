// Command-line front end for the experiments.
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biohybrid/biophys/network.hpp"
#include "biohybrid/biophys/serialize.hpp"
#include "biohybrid/biophys/simulate.hpp"
#include "biohybrid/errors.hpp"
#include "biohybrid/harness/config.hpp"
#include "biohybrid/harness/experiments.hpp"
#include "biohybrid/harness/presets.hpp"
#include "biohybrid/harness/report.hpp"
#include "biohybrid/hybridnet/checkpoint.hpp"
#include "biohybrid/hybridnet/train.hpp"
#include "biohybrid/preprocess/dataset.hpp"
#include "biohybrid/varfit/minprenum.hpp"
#include "biohybrid/varfit/serialize.hpp"

namespace fs = std::filesystem;
using namespace biohybrid;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::uint64_t> seeds;
    std::optional<std::size_t> trials;
    std::string out;
    std::string data;
    int threads = 1;
    std::optional<int> epochs;
    bool save_checkpoints = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_preset) {
    o.preset = default_preset;
    cmd->add_option("--preset", o.preset, "Named experiment")->capture_default_str();
    cmd->add_option("--config", o.config, "JSON config file (overrides --preset)");
    cmd->add_option("--seed", o.seed, "Single trial seed");
    cmd->add_option("--seeds", o.seeds, "Explicit list of trial seeds");
    cmd->add_option("--trials", o.trials, "Number of trials (seeds 1..n)");
    cmd->add_option("--out", o.out, "Output directory for report.json and metrics.csv");
    cmd->add_option("--data", o.data, "Directory holding the MNIST IDX files");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--epochs", o.epochs, "Override the epoch count of every variant");
    cmd->add_flag("--save-checkpoints", o.save_checkpoints, "Write one checkpoint per trial");
    cmd->add_flag("--quiet", o.quiet, "Only print the summary");
}

harness::ExperimentConfig resolve(const CommonOptions& o) {
    auto cfg = o.config.empty() ? harness::preset(o.preset) : harness::load_experiment_config(o.config);
    if (o.trials) cfg.seeds = harness::seed_range(*o.trials);
    if (o.seed) cfg.seeds = {*o.seed};
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    cfg.threads = o.threads;
    if (o.epochs) {
        for (auto& v : cfg.variants) v.train.epochs = *o.epochs;
    }
    cfg.validate();
    return cfg;
}

harness::RunOptions run_options(const CommonOptions& o) {
    harness::RunOptions r;
    r.out_dir = o.out;
    r.data_dir = o.data;
    r.save_checkpoints = o.save_checkpoints;
    if (!o.quiet) r.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
    return r;
}

void print_aggregates(const harness::RunReport& rep) {
    std::printf("%-24s %6s %10s %9s %10s %9s\n", "variant", "trials", "accuracy", "std", "nf_hidden", "f");
    for (const auto& a : rep.aggregates) {
        std::printf("%-24s %6zu %10.4f %9.4f %10.3f %9.3f\n", a.variant.c_str(), a.trials, a.mean_accuracy,
                    a.std_accuracy, a.mean_nf_hidden, a.mean_f_metric);
    }
    for (const auto& e : rep.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
    std::printf("wall clock %.1f s\n", rep.wall_seconds);
}

int run_training(const CommonOptions& o, const std::function<void(harness::ExperimentConfig&)>& tweak = {}) {
    auto cfg = resolve(o);
    if (tweak) tweak(cfg);
    const auto rep = harness::run_experiment(cfg, run_options(o));
    print_aggregates(rep);
    if (rep.results.contains("secondary_spikes")) {
        const auto& s = rep.results["secondary_spikes"];
        std::printf("secondary spikes: best cutoff %.1f ms, overlap %.3f (%zu primary, %zu secondary)\n",
                    s["best_cutoff"].get<double>(), s["best_overlap"].get<double>(),
                    s["total_primary"].get<std::size_t>(), s["total_secondary"].get<std::size_t>());
    }
    if (rep.results.contains("accuracy_drop_pp")) {
        std::printf("accuracy drop from cutoff noise: %.2f pp\n", rep.results["accuracy_drop_pp"].get<double>());
    }
    return rep.errors.empty() ? 0 : 2;
}

int run_fit_variations(const CommonOptions& o, std::optional<int> mp_trials, std::optional<int> fit_trials) {
    auto cfg = resolve(o);
    if (cfg.kind != harness::ExperimentKind::Minprenum) {
        throw ConfigError("fit-variations needs a minprenum experiment, got preset '" + cfg.name + "'");
    }
    if (mp_trials) cfg.varfit.minprenum.trials = *mp_trials;
    if (fit_trials) cfg.varfit.fit_trials = *fit_trials;
    const auto rep = harness::run_experiment(cfg, run_options(o));
    const auto& r = rep.results;
    if (r.contains("error")) {
        std::fprintf(stderr, "error: %s\n", r["error"].get<std::string>().c_str());
        return 2;
    }
    std::printf("expected minPreNum per cell:");
    for (double e : r["expectations"]) std::printf(" %.2f", e);
    std::printf("\nmean %.3f std %.3f\n", r["expectation_mean"].get<double>(), r["expectation_std"].get<double>());
    std::printf("threshold_dist N(%.5f, %.5f)\n", r["threshold_dist"]["mean"].get<double>(),
                r["threshold_dist"]["std"].get<double>());
    std::printf("weight_dist    N(%.5f, %.5f)%s\n", r["weight_dist"]["mean"].get<double>(),
                r["weight_dist"]["std"].get<double>(),
                r["weight_fit"]["on_boundary"].get<bool>() ? "  (on the grid boundary)" : "");
    if (o.out.empty()) std::cout << json{{"threshold_dist", r["threshold_dist"]}, {"weight_dist", r["weight_dist"]}}.dump(2) << '\n';
    return 0;
}

int run_minprenum(int cell, int trials, int n_max, std::uint64_t seed, int threads, const std::string& out,
                  const std::string& method_name) {
    varfit::MinPreNumOptions opt;
    opt.trials = trials;
    opt.n_max = n_max;
    opt.seed = seed;
    opt.threads = threads;
    const auto method = varfit::parse_expectation_method(method_name);
    std::vector<varfit::MinPreNumCurve> curves;
    if (cell == 0) {
        curves = varfit::minprenum_curves(opt);
    } else {
        curves.push_back(varfit::minprenum_curve(cell, opt));
    }
    json arr = json::array();
    for (const auto& c : curves) {
        json j = varfit::to_json(c);
        std::printf("cell %d:", c.post_cell);
        for (double p : c.p_fire) std::printf(" %.3f", p);
        try {
            const double e = varfit::curve_expectation(c, method);
            j["expectation"] = e;
            std::printf("  E=%.3f\n", e);
        } catch (const UndefinedExpectationError&) {
            j["expectation"] = nullptr;
            std::printf("  E=undefined\n");
        }
        arr.push_back(j);
    }
    if (!out.empty()) {
        harness::write_json(fs::path(out) / "minprenum.json",
                            json{{"trials", trials}, {"n_max", n_max}, {"seed", seed},
                                 {"method", varfit::to_string(method)}, {"curves", arr}});
    }
    return 0;
}

int run_evaluate(const std::string& checkpoint, const std::string& data, const std::string& split, std::size_t count,
                 std::optional<double> threshold, std::optional<double> nin_b, const std::string& out,
                 int threads) {
    hybridnet::TrainConfig tc;
    const auto model = hybridnet::load_checkpoint(checkpoint, &tc);
    harness::DatasetSpec ds;
    harness::InputSpec input;
    if (threshold) input.pool.binarize_threshold = *threshold;
    input.nin_b = nin_b;
    harness::PreparedData prepared;
    if (split == "train") {
        ds.train_count = count == 0 ? 60000 : count;
        ds.train_equals_test = true;
        prepared = harness::prepare_data(ds, input, data);
    } else if (split == "t10k" || split == "test") {
        // The Adpp threshold is always chosen on training images.
        ds.train_count = 60000;
        ds.test_count = count == 0 ? 10000 : count;
        ds.train_equals_test = false;
        if (!nin_b) ds.train_count = 1;
        prepared = harness::prepare_data(ds, input, data);
        prepared.train = prepared.test;
    } else {
        throw ConfigError("--split must be train or t10k");
    }
    const auto ev = hybridnet::evaluate_model(model, prepared.train, tc.noise, tc.seed, threads);
    std::printf("accuracy %.4f  nf_hidden %.3f  loss %.4f  (%zu images, threshold %g)\n", ev.accuracy, ev.nf_hidden,
                ev.loss, prepared.train.size(), prepared.threshold);
    if (!out.empty()) {
        harness::write_json(fs::path(out) / "evaluation.json",
                            json{{"checkpoint", checkpoint},
                                 {"split", split},
                                 {"images", prepared.train.size()},
                                 {"threshold", prepared.threshold},
                                 {"mean_nin_b", prepared.train.mean_nin_b},
                                 {"accuracy", ev.accuracy},
                                 {"nf_hidden", ev.nf_hidden},
                                 {"loss", ev.loss}});
    }
    return 0;
}

int run_adpp(const CommonOptions& o, const std::vector<double>& candidates, std::size_t probe, int epochs) {
    const auto cfg = resolve(o);
    const auto res = harness::run_adpp_tune(cfg, candidates, probe, epochs, o.data);
    json arr = json::array();
    std::printf("%8s %9s %10s %9s %10s\n", "nin_b", "threshold", "mean_ninb", "accuracy", "nf_hidden");
    for (const auto& c : res.candidates) {
        std::printf("%8g %9d %10.2f %9.4f %10.3f\n", c.target_ninb, c.threshold, c.mean_nin_b, c.accuracy, c.nf_hidden);
        arr.push_back(json{{"target_ninb", c.target_ninb},
                           {"threshold", c.threshold},
                           {"mean_nin_b", c.mean_nin_b},
                           {"accuracy", c.accuracy},
                           {"nf_hidden", c.nf_hidden}});
    }
    std::printf("selected nin_b %g (threshold %d)\n", res.best_ninb, res.best_threshold);
    if (!o.out.empty()) {
        harness::write_json(fs::path(o.out) / "adpp.json",
                            json{{"config", harness::to_json(cfg)},
                                 {"probe_images", probe},
                                 {"probe_epochs", epochs},
                                 {"candidates", arr},
                                 {"best_ninb", res.best_ninb},
                                 {"best_threshold", res.best_threshold}});
    }
    return 0;
}

struct SimOptions {
    int n_input = 196;
    int n_output = 100;
    double sparsity = 0.4;
    bool recurrent = false;
    std::uint64_t seed = 1;
    double duration = 60.0;
    std::optional<double> cutoff;
    int image = 0;
    std::string data;
    std::string out;
    bool traces = false;
};

int run_biophys_sim(const SimOptions& s) {
    const auto net = biophys::build_bio_network(s.n_input, s.n_output, s.sparsity, s.recurrent, s.seed);
    harness::DatasetSpec ds;
    ds.train_count = static_cast<std::size_t>(s.image) + 1;
    const auto prepared = harness::prepare_data(ds, harness::InputSpec{}, s.data);
    auto pattern = prepared.train.vectors.at(static_cast<std::size_t>(s.image));
    if (static_cast<int>(pattern.size()) != s.n_input) {
        throw ConfigError("--n-input must be 196 to present a pooled MNIST image");
    }
    biophys::SimConfig cfg;
    cfg.duration = s.duration;
    cfg.cutoff_time = s.cutoff;
    cfg.seed = s.seed;
    cfg.record_traces = s.traces;
    const auto rec = biophys::simulate_network(net, pattern, cfg);
    const auto outputs = net.output_ids();
    const auto bits = biophys::apply_cutoff(rec, s.cutoff.value_or(s.duration), outputs);
    std::size_t active = 0;
    for (auto b : bits) active += b;
    std::printf("%zu edges, %zu spikes, %zu of %d outputs fired (image %d, label %d)\n", net.edges.size(),
                rec.events.size(), active, s.n_output, s.image, prepared.train.labels.at(static_cast<std::size_t>(s.image)));
    const json j{{"network", biophys::to_json(net)},
                 {"sim", biophys::to_json(cfg)},
                 {"image", s.image},
                 {"pattern", pattern},
                 {"record", biophys::to_json(rec)},
                 {"output_bits", bits}};
    if (s.out.empty()) {
        std::cout << j.dump() << '\n';
    } else {
        harness::write_json(fs::path(s.out) / "biophys_sim.json", j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid bio-hardware network experiments"};
    app.require_subcommand(1);

    CommonOptions fit_o;
    std::optional<int> fit_mp_trials, fit_trials;
    auto* fit = app.add_subcommand("fit-variations", "minPreNum curves and the derived Vth / weight distributions");
    add_common(fit, fit_o, "minprenum");
    fit->add_option("--minprenum-trials", fit_mp_trials, "Trials per (cell, n)");
    fit->add_option("--fit-trials", fit_trials, "Trials per weight-grid point");
    fit->add_flag("--quiet", fit_o.quiet, "Only print the summary");

    int mp_cell = 0, mp_trials = 1000, mp_nmax = 20, mp_threads = 1;
    std::uint64_t mp_seed = 1;
    std::string mp_out, mp_method = "curve-difference";
    auto* mp = app.add_subcommand("minprenum", "Firing-probability curves per post cell");
    mp->add_option("--cell", mp_cell, "Post cell 1..9 (0 = all)")->capture_default_str();
    mp->add_option("--trials", mp_trials, "Trials per n")->capture_default_str();
    mp->add_option("--n-max", mp_nmax, "Largest presynaptic count")->capture_default_str();
    mp->add_option("--seed", mp_seed)->capture_default_str();
    mp->add_option("--threads", mp_threads)->capture_default_str();
    mp->add_option("--method", mp_method, "curve-difference or per-trial-minimum")->capture_default_str();
    mp->add_option("--out", mp_out, "Output directory");

    CommonOptions train_o;
    auto* train = app.add_subcommand("train", "Train a preset or config file");
    add_common(train, train_o, "var-study-var");
    add_train_flags(train, train_o);

    std::string ev_ckpt, ev_data, ev_split = "t10k", ev_out;
    std::size_t ev_count = 0;
    std::optional<double> ev_thr, ev_ninb;
    int ev_threads = 1;
    auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on MNIST");
    ev->add_option("--checkpoint", ev_ckpt, "Checkpoint JSON")->required();
    ev->add_option("--data", ev_data, "Directory holding the MNIST IDX files");
    ev->add_option("--split", ev_split, "train or t10k")->capture_default_str();
    ev->add_option("--count", ev_count, "First N images (0 = all)");
    ev->add_option("--threshold", ev_thr, "Binarization threshold (default 100)");
    ev->add_option("--nin-b", ev_ninb, "Adpp target; threshold chosen on the training images");
    ev->add_option("--threads", ev_threads)->capture_default_str();
    ev->add_option("--out", ev_out, "Output directory");

    CommonOptions adpp_o;
    std::vector<double> adpp_candidates{10, 15, 20, 25, 30};
    std::size_t adpp_probe = 100;
    int adpp_epochs = 100;
    auto* adpp = app.add_subcommand("adpp-tune", "Pick Nin_b on a small probe set");
    add_common(adpp, adpp_o, "opt-1000");
    adpp->add_option("--candidates", adpp_candidates, "Candidate Nin_b targets")->capture_default_str();
    adpp->add_option("--probe-count", adpp_probe, "Probe images")->capture_default_str();
    adpp->add_option("--probe-epochs", adpp_epochs, "Epochs per candidate")->capture_default_str();

    CommonOptions sweep_o;
    std::string sweep_kind = "sparsity";
    auto* sweep = app.add_subcommand("sweep", "Sparsity, estimator or Nin_b sweep");
    add_common(sweep, sweep_o, "");
    add_train_flags(sweep, sweep_o);
    sweep->add_option("--kind", sweep_kind, "sparsity, estimator or ninb")
        ->check(CLI::IsMember({"sparsity", "estimator", "ninb"}))
        ->capture_default_str();

    SimOptions sim_o;
    auto* sim = app.add_subcommand("biophys-sim", "Simulate one biophysical network on one MNIST image");
    sim->add_option("--n-input", sim_o.n_input)->capture_default_str();
    sim->add_option("--n-output", sim_o.n_output)->capture_default_str();
    sim->add_option("--sparsity", sim_o.sparsity)->capture_default_str();
    sim->add_flag("--recurrent", sim_o.recurrent, "Add input-input, output-output and output-input edges");
    sim->add_option("--seed", sim_o.seed)->capture_default_str();
    sim->add_option("--duration", sim_o.duration, "ms")->capture_default_str();
    sim->add_option("--cutoff", sim_o.cutoff, "Early cutoff time in ms");
    sim->add_option("--image", sim_o.image, "Training image index")->capture_default_str();
    sim->add_option("--data", sim_o.data, "Directory holding the MNIST IDX files");
    sim->add_option("--out", sim_o.out, "Output directory (stdout when empty)");
    sim->add_flag("--traces", sim_o.traces, "Record somatic voltage traces");

    CommonOptions cut_o;
    std::optional<std::size_t> cut_images;
    auto* cut = app.add_subcommand("cutoff-study", "Secondary-spike study and the cutoff-noise accuracy effect");
    add_common(cut, cut_o, "cutoff-study");
    add_train_flags(cut, cut_o);
    cut->add_option("--images", cut_images, "Images for the secondary-spike study");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return run_fit_variations(fit_o, fit_mp_trials, fit_trials);
        if (*mp) return run_minprenum(mp_cell, mp_trials, mp_nmax, mp_seed, mp_threads, mp_out, mp_method);
        if (*train) return run_training(train_o);
        if (*ev) return run_evaluate(ev_ckpt, ev_data, ev_split, ev_count, ev_thr, ev_ninb, ev_out, ev_threads);
        if (*adpp) return run_adpp(adpp_o, adpp_candidates, adpp_probe, adpp_epochs);
        if (*sweep) {
            if (sweep_o.preset.empty() && sweep_o.config.empty()) {
                sweep_o.preset = sweep_kind == "sparsity"    ? "sparsity-sweep"
                                 : sweep_kind == "estimator" ? "estimator-sweep"
                                                             : "adpp-sweep";
            }
            return run_training(sweep_o);
        }
        if (*sim) return run_biophys_sim(sim_o);
        if (*cut) {
            return run_training(cut_o, [&](harness::ExperimentConfig& cfg) {
                if (cut_images) cfg.cutoff.images = *cut_images;
            });
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

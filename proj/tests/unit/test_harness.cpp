#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "biohybrid/errors.hpp"
#include "biohybrid/harness/config.hpp"
#include "biohybrid/harness/experiments.hpp"
#include "biohybrid/harness/presets.hpp"
#include "biohybrid/harness/report.hpp"
#include "biohybrid/hybridnet/checkpoint.hpp"

using namespace biohybrid;
using namespace biohybrid::harness;
using nlohmann::json;

namespace {

const std::filesystem::path kMnist = BIOHYBRID_TEST_MNIST_DIR;

bool have_mnist() { return std::filesystem::exists(kMnist / "train-images-idx3-ubyte"); }

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("biohybrid_harness_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("preset values") {
    const auto opt = preset("opt-1000");
    REQUIRE(opt.variants.size() == 1);
    CHECK(opt.variants[0].train.estimator.lower == 0.0);
    CHECK(opt.variants[0].train.estimator.upper == 0.0075);
    CHECK(opt.data.train_count == 1000);
    CHECK(opt.data.train_equals_test);
    CHECK(opt.variants[0].train.lr_bio == 5e-6);
    CHECK(opt.variants[0].train.lr_hw == 0.008);
    CHECK(opt.variants[0].model.hw_init == NormalSpec{0.0007, 0.03});
    REQUIRE(opt.variants[0].train.adlr);
    CHECK(opt.variants[0].train.adlr->lr0_bio == 5e-6);
    CHECK(opt.variants[0].train.adlr->lr0_hw == 0.1);
    CHECK(opt.variants[0].train.adlr->decay_rate == 0.2);
    CHECK(*opt.variants[0].input.nin_b == 20.0);

    const auto full = preset("full-mnist-2000");
    CHECK(*full.variants[0].input.nin_b == 26.0);
    CHECK(full.variants[0].model.n_hidden == 2000);
    CHECK(full.data.train_count == 60000);
    CHECK(full.data.test_count == 10000);
    CHECK(!full.data.train_equals_test);
    CHECK(full.variants[0].train.adlr->lr0_bio == 1e-5);
    CHECK(full.variants[0].train.adlr->lr0_hw == 0.1);

    const auto fixed = preset("var-study-fixed");
    CHECK(fixed.variants[0].model.vth == NormalSpec{0.0055, 0.0});
    CHECK(fixed.variants[0].model.weight_init == NormalSpec{0.00072, 0.0});
    const auto var = preset("var-study-var");
    CHECK(var.variants[0].model.vth == NormalSpec{0.0058, 0.0017});
    CHECK(var.variants[0].model.weight_init == NormalSpec{0.0007, 0.0007});
    CHECK(var.variants[0].model.sparsity == 0.4);
    CHECK(var.data.train_count == 100);
    CHECK(var.trials() == 10);

    CHECK(preset("sparsity-sweep").variants.size() == 10);
    CHECK(preset("adlr").variants.size() == 4);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
}

TEST_CASE("unknown preset lists the valid names") {
    try {
        preset("nope");
        FAIL("no error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const auto& name : preset_names()) CHECK(msg.find(name) != std::string::npos);
    }
}

TEST_CASE("config json round trip and overrides") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto cfg = preset(name);
        const auto j = to_json(cfg);
        CHECK(to_json(experiment_from_json(j)) == j);
    }
    const json over{{"preset", "opt-1000"},
                    {"trials", 3},
                    {"train", {{"epochs", 7}}},
                    {"model", {{"sparsity", 0.3}}},
                    {"data", {{"train_count", 50}}}};
    const auto cfg = experiment_from_json(over);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.variants[0].train.epochs == 7);
    CHECK(cfg.variants[0].train.estimator.upper == 0.0075);
    CHECK(cfg.variants[0].model.sparsity == 0.3);
    CHECK(cfg.data.train_count == 50);
    CHECK_THROWS_AS(experiment_from_json(json{{"preset", "opt-1000"}, {"model", {{"n_in", 100}}}}), ConfigError);
}

TEST_CASE("aggregates recompute from trials") {
    std::vector<TrialResult> trials(3);
    const double acc[] = {0.8, 0.9, 0.7};
    for (int i = 0; i < 3; ++i) {
        trials[i].variant = "v";
        hybridnet::EpochRecord r;
        r.epoch = 1;
        r.test_accuracy = acc[i];
        r.nf_hidden = 0.5;
        trials[i].history.epochs.push_back(r);
    }
    trials[2].error = "boom";
    const auto agg = aggregate(trials, {"v"});
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].trials == 2);
    CHECK(agg[0].mean_accuracy == doctest::Approx(0.85));
    CHECK(agg[0].std_accuracy == doctest::Approx(sample_std(std::vector<double>{0.8, 0.9})));
}

TEST_CASE("metrics csv is flushed per row") {
    const auto dir = scratch_dir("csv");
    {
        MetricsCsv csv(dir / "m.csv");
        hybridnet::EpochRecord r;
        r.epoch = 1;
        r.test_accuracy = 0.5;
        csv.write_epoch("a", 0, 1, r);
        std::ifstream in(dir / "m.csv");
        std::stringstream ss;
        ss << in.rdbuf();
        const auto text = ss.str();
        CHECK(text.rfind("variant,trial,seed,epoch,metric,value\n", 0) == 0);
        CHECK(text.find("\"a\",0,1,1,test_accuracy,0.5") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("identical seeds give identical histories") {
    if (!have_mnist()) {
        MESSAGE("MNIST not found; skipping");
        return;
    }
    auto cfg = experiment_from_json(json{{"preset", "var-study-var"},
                                         {"seeds", {4, 4}},
                                         {"train", {{"epochs", 3}}},
                                         {"data", {{"train_count", 60}}}});
    const auto dir = scratch_dir("det");
    RunOptions opt;
    opt.out_dir = dir;
    opt.data_dir = kMnist;
    opt.save_checkpoints = true;
    const auto rep = run_experiment(cfg, opt);
    REQUIRE(rep.trials.size() == 2);
    for (const auto& e : rep.errors) MESSAGE(e);
    REQUIRE(rep.errors.empty());
    CHECK(hybridnet::to_json(rep.trials[0].history) == hybridnet::to_json(rep.trials[1].history));
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "metrics.csv"));
    CHECK(std::filesystem::exists(dir / "checkpoints"));
    std::ifstream in(dir / "report.json");
    const auto j = json::parse(in);
    CHECK(j["config"]["variants"][0]["model"]["sparsity"] == 0.4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sparsity sweep report has one row per sparsity") {
    if (!have_mnist()) {
        MESSAGE("MNIST not found; skipping");
        return;
    }
    auto cfg = experiment_from_json(
        json{{"preset", "sparsity-sweep"}, {"trials", 1}, {"train", {{"epochs", 1}}}, {"data", {{"train_count", 30}}}});
    RunOptions opt;
    opt.data_dir = kMnist;
    const auto rep = run_experiment(cfg, opt);
    REQUIRE(rep.aggregates.size() == 10);
    CHECK(rep.aggregates.front().variant == "sparsity-10%");
    CHECK(rep.aggregates.back().variant == "sparsity-100%");
    for (const auto& a : rep.aggregates) CHECK(a.trials == 1);
}

TEST_CASE("missing dataset is reported with its path") {
    auto cfg = preset("var-study-var");
    RunOptions opt;
    opt.data_dir = "/nonexistent/mnist";
    try {
        run_experiment(cfg, opt);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("/nonexistent/mnist") != std::string::npos);
    }
}

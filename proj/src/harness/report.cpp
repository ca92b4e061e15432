#include "biohybrid/harness/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "biohybrid/errors.hpp"
#include "biohybrid/hybridnet/checkpoint.hpp"

namespace biohybrid::harness {

using nlohmann::json;

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<VariantAggregate> aggregate(const std::vector<TrialResult>& trials, const std::vector<std::string>& order) {
    std::vector<VariantAggregate> out;
    for (const auto& name : order) {
        VariantAggregate a;
        a.variant = name;
        std::vector<double> acc, nf, f;
        std::vector<std::vector<double>> curves;
        for (const auto& t : trials) {
            if (t.variant != name || !t.ok()) continue;
            const auto& last = t.final_epoch();
            acc.push_back(last.test_accuracy);
            nf.push_back(last.nf_hidden);
            f.push_back(last.f_metric);
            std::vector<double> c;
            for (const auto& e : t.history.epochs) c.push_back(e.test_accuracy);
            curves.push_back(std::move(c));
        }
        a.trials = acc.size();
        a.mean_accuracy = mean(acc);
        a.std_accuracy = sample_std(acc);
        a.mean_nf_hidden = mean(nf);
        a.std_nf_hidden = sample_std(nf);
        a.mean_f_metric = mean(f);
        a.std_f_metric = sample_std(f);
        if (!curves.empty()) {
            std::size_t len = curves.front().size();
            for (const auto& c : curves) len = std::min(len, c.size());
            a.mean_accuracy_curve.assign(len, 0.0);
            for (std::size_t e = 0; e < len; ++e) {
                for (const auto& c : curves) a.mean_accuracy_curve[e] += c[e];
                a.mean_accuracy_curve[e] /= static_cast<double>(curves.size());
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

json to_json(const TrialResult& t) {
    json j{{"variant", t.variant},
           {"trial", t.trial},
           {"seed", t.seed},
           {"threshold", t.threshold},
           {"train_nin_b", t.train_nin_b},
           {"test_nin_b", t.test_nin_b},
           {"seconds", t.seconds},
           {"history", hybridnet::to_json(t.history)}};
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    if (t.ok()) {
        j["final_accuracy"] = t.final_epoch().test_accuracy;
        j["final_nf_hidden"] = t.final_epoch().nf_hidden;
        j["final_f_metric"] = t.final_epoch().f_metric;
    }
    return j;
}

json to_json(const VariantAggregate& a) {
    return json{{"variant", a.variant},
                {"trials", a.trials},
                {"mean_accuracy", a.mean_accuracy},
                {"std_accuracy", a.std_accuracy},
                {"mean_nf_hidden", a.mean_nf_hidden},
                {"std_nf_hidden", a.std_nf_hidden},
                {"mean_f_metric", a.mean_f_metric},
                {"std_f_metric", a.std_f_metric},
                {"mean_accuracy_curve", a.mean_accuracy_curve}};
}

json to_json(const RunReport& r) {
    json trials = json::array();
    for (const auto& t : r.trials) trials.push_back(to_json(t));
    json aggs = json::array();
    for (const auto& a : r.aggregates) aggs.push_back(to_json(a));
    return json{{"config", r.config},     {"data_dir", r.data_dir}, {"trials", trials},
                {"aggregates", aggs},     {"results", r.results},   {"errors", r.errors},
                {"wall_seconds", r.wall_seconds}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

MetricsCsv::MetricsCsv(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw Error("cannot write " + path.string());
    out_ << "variant,trial,seed,epoch,metric,value\n" << std::flush;
}

void MetricsCsv::write_row(const std::string& variant, std::size_t trial, std::uint64_t seed, int epoch,
                           const std::string& metric, double value) {
    std::ostringstream line;
    line << std::setprecision(10) << '"' << variant << "\"," << trial << ',' << seed << ',' << epoch << ',' << metric
         << ',' << value << '\n';
    std::lock_guard<std::mutex> lock(mutex_);
    if (!out_.is_open()) return;
    out_ << line.str() << std::flush;
}

void MetricsCsv::write_epoch(const std::string& variant, std::size_t trial, std::uint64_t seed,
                             const hybridnet::EpochRecord& r) {
    std::ostringstream block;
    block << std::setprecision(10);
    const std::pair<const char*, double> rows[] = {
        {"test_accuracy", r.test_accuracy}, {"test_loss", r.test_loss},   {"train_accuracy", r.train_accuracy},
        {"train_loss", r.train_loss},       {"nf_hidden", r.nf_hidden},   {"f_metric", r.f_metric},
        {"mean_weight", r.mean_weight},     {"lr_bio", r.lr_bio},         {"lr_hw", r.lr_hw}};
    for (const auto& [metric, value] : rows) {
        block << '"' << variant << "\"," << trial << ',' << seed << ',' << r.epoch << ',' << metric << ',' << value
              << '\n';
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (!out_.is_open()) return;
    out_ << block.str() << std::flush;
}

}  // namespace biohybrid::harness

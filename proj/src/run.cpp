#include "run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace dlsm {

namespace fs = std::filesystem;

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw DataError("cannot create directory " + path + ": " + ec.message());
}

uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for digest: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    }
    return h;
}

std::string json_escape(const std::string& s) {
    return nlohmann::json(s).dump();
}

namespace {

std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const ModelConfig& cfg, const std::string& graph_path,
                    const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["timestamp"] = timestamp_utc();
    if (!graph_path.empty()) {
        j["inputs"]["graph"] = graph_path;
        j["inputs"]["graph_digest"] = file_digest(graph_path);
    }
    nlohmann::ordered_json cfgmap;
    std::istringstream cs(cfg.serialize());
    std::string line;
    while (std::getline(cs, line)) {
        size_t eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        cfgmap[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = cfgmap;
    j["config_hash"] = cfg.hash_hex();
    j["seed"] = cfg.seed;
    j["outputs"] = outputs;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

} // namespace

TrainRunResult run_train(const DirectedGraph& preprocessed, const ModelConfig& cfg,
                         const std::string& outdir, const std::string& graph_path_for_manifest) {
    cfg.validate();
    ensure_dir(outdir);

    SplitRatios ratios{cfg.train_ratio, cfg.test_ratio, cfg.val_ratio};
    EdgeSplit split = split_edges(preprocessed, ratios, cfg.seed);
    TrainedModel tm = train(preprocessed, split, cfg);

    TrainRunResult result;
    result.checkpoint_path = (fs::path(outdir) / "checkpoint.dlsm").string();
    result.history_path = (fs::path(outdir) / "history.csv").string();
    result.manifest_path = (fs::path(outdir) / "manifest.json").string();
    result.best_val_auc = tm.best_val_auc;

    save_checkpoint(tm, result.checkpoint_path);
    write_history_csv(tm.history, result.history_path);
    write_manifest(result.manifest_path, "train", cfg, graph_path_for_manifest,
                   {result.checkpoint_path, result.history_path});
    return result;
}

std::string run_stats_json(const std::string& graph_path) {
    DirectedGraph g = preprocess(load_edge_list(graph_path));
    return stats_to_json(descriptive_stats(g));
}

namespace {

struct SeedOutcome {
    bool ok = false;
    double auc = 0.0, ap = 0.0;
    double accuracy = -1.0;
    std::string error;
};

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
    return {mean, std::sqrt(var)};
}

} // namespace

std::string run_repro(const DirectedGraph& preprocessed, const ModelConfig& base,
                      const ReproOptions& opts, const std::string& outdir) {
    if (opts.n_seeds < 1) throw UsageError("repro: n_seeds must be positive");
    ensure_dir(outdir);

    std::vector<int> truth;
    int k = opts.k;
    if (opts.truth_path) {
        truth = load_truth_labels(preprocessed, *opts.truth_path, opts.min_community_size);
        if (k == 0) {
            std::map<int, int> seen;
            for (int t : truth)
                if (t >= 0) seen.emplace(t, 0);
            k = static_cast<int>(seen.size());
        }
    }

    std::vector<SeedOutcome> outcomes;
    for (int s = 1; s <= opts.n_seeds; ++s) {
        fs::path seed_dir = fs::path(outdir) / ("seed_" + std::to_string(s));
        fs::path report_path = seed_dir / "eval.json";
        SeedOutcome out;

        if (fs::exists(report_path)) {
            // resume: reuse a completed seed
            try {
                std::ifstream in(report_path);
                nlohmann::json j = nlohmann::json::parse(in);
                out.auc = j.at("auc").get<double>();
                out.ap = j.at("ap").get<double>();
                if (j.contains("accuracy")) out.accuracy = j["accuracy"].get<double>();
                out.ok = true;
                outcomes.push_back(out);
                continue;
            } catch (const std::exception&) {
                // fall through and recompute
            }
        }

        try {
            ensure_dir(seed_dir.string());
            ModelConfig cfg = base;
            cfg.seed = static_cast<uint64_t>(s);
            SplitRatios ratios{cfg.train_ratio, cfg.test_ratio, cfg.val_ratio};
            EdgeSplit split = split_edges(preprocessed, ratios, cfg.seed);
            TrainedModel tm = train(preprocessed, split, cfg);

            EvalReport lp = link_prediction_eval(tm, split);
            out.auc = *lp.auc;
            out.ap = *lp.ap;

            nlohmann::ordered_json j = nlohmann::ordered_json::parse(lp.to_json());
            if (!truth.empty()) {
                EvalReport cd = community_detection_eval(tm, truth, k);
                out.accuracy = *cd.accuracy;
                j["accuracy"] = out.accuracy;
            }
            std::ofstream rp(report_path);
            rp << j.dump(2) << '\n';
            save_checkpoint(tm, (seed_dir / "checkpoint.dlsm").string());
            write_history_csv(tm.history, (seed_dir / "history.csv").string());
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
            std::ofstream ep(seed_dir / "error.txt");
            ep << e.what() << '\n';
        }
        outcomes.push_back(out);
    }

    std::vector<double> aucs, aps, accs;
    int failures = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            failures++;
            continue;
        }
        aucs.push_back(o.auc);
        aps.push_back(o.ap);
        if (o.accuracy >= 0.0) accs.push_back(o.accuracy);
    }

    auto [auc_m, auc_sd] = mean_sd(aucs);
    auto [ap_m, ap_sd] = mean_sd(aps);
    std::string method = base.mode == ReconMode::Distance ? "DLSM" : "DLSM-IP";

    std::ostringstream csv;
    csv.precision(10);
    csv << "method,metric,dataset,mean,sd,seeds_completed,formatted\n";
    auto row = [&](const std::string& metric, double m, double sd, size_t cnt) {
        char cell[64];
        snprintf(cell, sizeof(cell), "%.3f+-%.3f", m, sd);
        csv << method << ',' << metric << ',' << opts.dataset_name << ',' << m << ',' << sd << ','
            << cnt << ',' << cell << '\n';
    };
    if (!aucs.empty()) {
        row("auc", auc_m, auc_sd, aucs.size());
        row("ap", ap_m, ap_sd, aps.size());
    }
    if (!accs.empty()) {
        auto [acc_m, acc_sd] = mean_sd(accs);
        row("accuracy", acc_m, acc_sd, accs.size());
    }

    std::string table = csv.str();
    std::ofstream out(fs::path(outdir) / "aggregate.csv", std::ios::trunc);
    out << table;

    if (!outcomes.empty() && static_cast<size_t>(failures) == outcomes.size())
        throw NumericError("repro: every seed failed");
    return table;
}

} // namespace dlsm

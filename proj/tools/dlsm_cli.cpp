// Command-line front end; talks to the library exclusively through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "dlsm/dlsm.h"

namespace {

struct StringOut {
    char* s = nullptr;
    ~StringOut() { dlsm_string_free(s); }
};

int fail(dlsm_status rc) {
    fprintf(stderr, "error: %s\n", dlsm_last_error());
    return static_cast<int>(rc);
}

using GraphPtr = std::unique_ptr<dlsm_graph, decltype(&dlsm_graph_free)>;
using ConfigPtr = std::unique_ptr<dlsm_config, decltype(&dlsm_config_free)>;
using ModelPtr = std::unique_ptr<dlsm_model, decltype(&dlsm_model_free)>;

// loads + preprocesses, surfacing the status code on failure
int load_graph(const std::string& path, bool directed, const std::string& attr_path,
               GraphPtr& out) {
    dlsm_graph* raw = nullptr;
    if (auto rc = dlsm_graph_load(path.c_str(), directed ? 1 : 0, &raw)) return fail(rc);
    GraphPtr loaded(raw, dlsm_graph_free);
    if (!attr_path.empty())
        if (auto rc = dlsm_graph_load_attributes(loaded.get(), attr_path.c_str()))
            return fail(rc);
    dlsm_graph* pre = nullptr;
    if (auto rc = dlsm_graph_preprocess(loaded.get(), &pre)) return fail(rc);
    out = GraphPtr(pre, dlsm_graph_free);
    return 0;
}

int build_config(const std::string& config_path, const std::vector<std::string>& overrides,
                 ConfigPtr& out) {
    dlsm_config* raw = nullptr;
    dlsm_status rc =
        config_path.empty() ? dlsm_config_create(&raw) : dlsm_config_load(config_path.c_str(), &raw);
    if (rc) return fail(rc);
    out = ConfigPtr(raw, dlsm_config_free);
    for (const auto& kv : overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
            return 2;
        }
        if (auto src = dlsm_config_set(out.get(), kv.substr(0, eq).c_str(),
                                       kv.substr(eq + 1).c_str()))
            return fail(src);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-space representation learning for directed graphs"};
    app.require_subcommand(1);

    // ---- stats ----
    std::string stats_graph;
    bool stats_undirected_file = false;
    auto* stats = app.add_subcommand("stats", "descriptive statistics of an edge list");
    stats->add_option("graph", stats_graph, "edge list file")->required();
    stats->add_flag("--undirected-input", stats_undirected_file,
                    "treat each line as an undirected edge");

    // ---- train ----
    std::string train_graph, train_attrs, train_config, train_outdir = "run";
    std::vector<std::string> train_sets;
    uint64_t train_seed = 0;
    bool train_seed_set = false;
    auto* tr = app.add_subcommand("train", "split, train, and checkpoint a model");
    tr->add_option("graph", train_graph, "edge list file")->required();
    tr->add_option("--attributes", train_attrs, "node attribute csv");
    tr->add_option("--config", train_config, "config file (key = value lines)");
    tr->add_option("--outdir", train_outdir, "output directory");
    tr->add_option("--seed", train_seed, "master seed (overrides config)")
        ->each([&](const std::string&) { train_seed_set = true; });
    tr->add_option("--set", train_sets, "config override key=value (repeatable)");

    // ---- eval ----
    std::string eval_ckpt, eval_task, eval_truth, eval_out;
    int eval_k = 0, eval_min_comm = 0;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint (lp | cd | factors)");
    ev->add_option("checkpoint", eval_ckpt, "checkpoint file")->required();
    ev->add_option("--task", eval_task, "lp, cd, or factors")->required();
    ev->add_option("--truth", eval_truth, "truth labels file (cd)");
    ev->add_option("--k", eval_k, "cluster count (cd; default from truth)");
    ev->add_option("--min-community-size", eval_min_comm,
                   "exclude smaller ground-truth communities (cd)");
    ev->add_option("--out", eval_out, "write the JSON report here (factors: also <out>.csv)");

    // ---- export ----
    std::string exp_ckpt, exp_out = "embeddings.csv";
    auto* ex = app.add_subcommand("export", "export posterior-mean embeddings as csv");
    ex->add_option("checkpoint", exp_ckpt, "checkpoint file")->required();
    ex->add_option("--out", exp_out, "output csv path");

    // ---- repro ----
    std::string rep_graph, rep_attrs, rep_config, rep_outdir = "repro", rep_truth, rep_name;
    std::vector<std::string> rep_sets;
    int rep_seeds = 10, rep_k = 0, rep_min_comm = 0;
    auto* rp = app.add_subcommand("repro", "aggregate mean+-sd over independent seeds");
    rp->add_option("graph", rep_graph, "edge list file")->required();
    rp->add_option("--attributes", rep_attrs, "node attribute csv");
    rp->add_option("--config", rep_config, "config file");
    rp->add_option("--outdir", rep_outdir, "output directory");
    rp->add_option("--seeds", rep_seeds, "number of seeds");
    rp->add_option("--truth", rep_truth, "truth labels for community detection");
    rp->add_option("--k", rep_k, "cluster count (default from truth)");
    rp->add_option("--min-community-size", rep_min_comm, "exclude smaller communities");
    rp->add_option("--dataset-name", rep_name, "column label in the aggregate table");
    rp->add_option("--set", rep_sets, "config override key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (stats->parsed()) {
        GraphPtr g(nullptr, dlsm_graph_free);
        if (int rc = load_graph(stats_graph, !stats_undirected_file, "", g)) return rc;
        StringOut json;
        if (auto rc = dlsm_graph_stats_json(g.get(), &json.s)) return fail(rc);
        printf("%s\n", json.s);
        return 0;
    }

    if (tr->parsed()) {
        GraphPtr g(nullptr, dlsm_graph_free);
        if (int rc = load_graph(train_graph, true, train_attrs, g)) return rc;
        ConfigPtr cfg(nullptr, dlsm_config_free);
        if (int rc = build_config(train_config, train_sets, cfg)) return rc;
        if (train_seed_set)
            if (auto rc = dlsm_config_set(cfg.get(), "seed", std::to_string(train_seed).c_str()))
                return fail(rc);
        dlsm_model* m = nullptr;
        if (auto rc = dlsm_train_run(g.get(), cfg.get(), train_outdir.c_str(),
                                     train_graph.c_str(), &m))
            return fail(rc);
        ModelPtr model(m, dlsm_model_free);
        printf("checkpoint written to %s/checkpoint.dlsm\n", train_outdir.c_str());
        return 0;
    }

    if (ev->parsed()) {
        dlsm_model* m = nullptr;
        if (auto rc = dlsm_model_load(eval_ckpt.c_str(), &m)) return fail(rc);
        ModelPtr model(m, dlsm_model_free);
        StringOut json;
        if (eval_task == "lp") {
            if (auto rc = dlsm_eval_link_prediction(model.get(), &json.s)) return fail(rc);
        } else if (eval_task == "cd") {
            if (eval_truth.empty()) {
                fprintf(stderr, "error: --task cd requires --truth labels\n");
                return 2;
            }
            if (auto rc = dlsm_eval_communities(model.get(), eval_truth.c_str(), eval_k,
                                                eval_min_comm, &json.s))
                return fail(rc);
        } else if (eval_task == "factors") {
            std::string csv = eval_out.empty() ? "factors.csv" : eval_out + ".csv";
            if (auto rc = dlsm_eval_factors(model.get(), csv.c_str(), &json.s)) return fail(rc);
        } else {
            fprintf(stderr, "error: unknown task '%s' (expected lp, cd, or factors)\n",
                    eval_task.c_str());
            return 2;
        }
        if (!eval_out.empty()) {
            FILE* f = fopen(eval_out.c_str(), "w");
            if (!f) {
                fprintf(stderr, "error: cannot write %s\n", eval_out.c_str());
                return 3;
            }
            fprintf(f, "%s\n", json.s);
            fclose(f);
        }
        printf("%s\n", json.s);
        return 0;
    }

    if (ex->parsed()) {
        dlsm_model* m = nullptr;
        if (auto rc = dlsm_model_load(exp_ckpt.c_str(), &m)) return fail(rc);
        ModelPtr model(m, dlsm_model_free);
        if (auto rc = dlsm_export_embeddings(model.get(), exp_out.c_str())) return fail(rc);
        printf("embeddings written to %s\n", exp_out.c_str());
        return 0;
    }

    if (rp->parsed()) {
        GraphPtr g(nullptr, dlsm_graph_free);
        if (int rc = load_graph(rep_graph, true, rep_attrs, g)) return rc;
        ConfigPtr cfg(nullptr, dlsm_config_free);
        if (int rc = build_config(rep_config, rep_sets, cfg)) return rc;
        if (rep_name.empty()) rep_name = rep_graph;
        StringOut table;
        if (auto rc = dlsm_repro(g.get(), cfg.get(), rep_seeds, rep_outdir.c_str(),
                                 rep_name.c_str(), rep_truth.empty() ? nullptr : rep_truth.c_str(),
                                 rep_k, rep_min_comm, &table.s))
            return fail(rc);
        printf("%s", table.s);
        return 0;
    }

    return 2;
}

#include "dlsm/dlsm.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "run.hpp"
#include "split.hpp"
#include "trainer.hpp"

// Opaque handle definitions wrap the C++ types one-to-one.
struct dlsm_graph {
    dlsm::DirectedGraph g;
};
struct dlsm_config {
    dlsm::ModelConfig c;
};
struct dlsm_model {
    dlsm::TrainedModel tm;
};

namespace {

thread_local std::string g_last_error = "";

dlsm_status capture(const std::exception& e) {
    g_last_error = e.what();
    if (auto* err = dynamic_cast<const dlsm::Error*>(&e))
        return static_cast<dlsm_status>(err->code());
    return DLSM_ERROR_INTERNAL;
}

template <typename F>
dlsm_status guarded(F&& f) {
    try {
        f();
        return DLSM_OK;
    } catch (const std::exception& e) {
        return capture(e);
    } catch (...) {
        g_last_error = "unknown error";
        return DLSM_ERROR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

dlsm_status require(bool ok, const char* msg) {
    if (ok) return DLSM_OK;
    g_last_error = msg;
    return DLSM_ERROR_USAGE;
}

} // namespace

extern "C" {

const char* dlsm_last_error(void) { return g_last_error.c_str(); }

void dlsm_string_free(char* s) { ::free(s); }

/* ---- graphs ------------------------------------------------------------ */

dlsm_status dlsm_graph_load(const char* path, int directed, dlsm_graph** out) {
    if (auto rc = require(path && out, "dlsm_graph_load: null argument")) return rc;
    return guarded([&] {
        auto* h = new dlsm_graph{dlsm::load_edge_list(path, directed != 0)};
        *out = h;
    });
}

dlsm_status dlsm_graph_load_attributes(dlsm_graph* g, const char* path) {
    if (auto rc = require(g && path, "dlsm_graph_load_attributes: null argument")) return rc;
    return guarded([&] { dlsm::load_attributes(g->g, path); });
}

dlsm_status dlsm_graph_preprocess(const dlsm_graph* g, dlsm_graph** out) {
    if (auto rc = require(g && out, "dlsm_graph_preprocess: null argument")) return rc;
    return guarded([&] { *out = new dlsm_graph{dlsm::preprocess(g->g)}; });
}

dlsm_status dlsm_graph_stats_json(const dlsm_graph* g, char** json_out) {
    if (auto rc = require(g && json_out, "dlsm_graph_stats_json: null argument")) return rc;
    return guarded([&] {
        *json_out = dup_string(dlsm::stats_to_json(dlsm::descriptive_stats(g->g)));
    });
}

int64_t dlsm_graph_node_count(const dlsm_graph* g) { return g ? g->g.n : -1; }
int64_t dlsm_graph_edge_count(const dlsm_graph* g) { return g ? g->g.edge_count() : -1; }

void dlsm_graph_free(dlsm_graph* g) { delete g; }

/* ---- configuration ------------------------------------------------------ */

dlsm_status dlsm_config_create(dlsm_config** out) {
    if (auto rc = require(out != nullptr, "dlsm_config_create: null argument")) return rc;
    return guarded([&] { *out = new dlsm_config{}; });
}

dlsm_status dlsm_config_load(const char* path, dlsm_config** out) {
    if (auto rc = require(path && out, "dlsm_config_load: null argument")) return rc;
    return guarded([&] { *out = new dlsm_config{dlsm::ModelConfig::from_file(path)}; });
}

dlsm_status dlsm_config_set(dlsm_config* c, const char* key, const char* value) {
    if (auto rc = require(c && key && value, "dlsm_config_set: null argument")) return rc;
    return guarded([&] { c->c.set(key, value); });
}

dlsm_status dlsm_config_serialize(const dlsm_config* c, char** text_out) {
    if (auto rc = require(c && text_out, "dlsm_config_serialize: null argument")) return rc;
    return guarded([&] { *text_out = dup_string(c->c.serialize()); });
}

void dlsm_config_free(dlsm_config* c) { delete c; }

/* ---- training and checkpoints ------------------------------------------ */

dlsm_status dlsm_train(const dlsm_graph* preprocessed, const dlsm_config* cfg, dlsm_model** out) {
    if (auto rc = require(preprocessed && cfg && out, "dlsm_train: null argument")) return rc;
    return guarded([&] {
        const dlsm::ModelConfig& c = cfg->c;
        c.validate();
        dlsm::SplitRatios ratios{c.train_ratio, c.test_ratio, c.val_ratio};
        dlsm::EdgeSplit split = dlsm::split_edges(preprocessed->g, ratios, c.seed);
        auto* h = new dlsm_model{dlsm::train(preprocessed->g, split, c)};
        *out = h;
    });
}

dlsm_status dlsm_train_run(const dlsm_graph* preprocessed, const dlsm_config* cfg,
                           const char* outdir, const char* graph_path, dlsm_model** out) {
    if (auto rc = require(preprocessed && cfg && outdir, "dlsm_train_run: null argument"))
        return rc;
    return guarded([&] {
        dlsm::TrainRunResult r = dlsm::run_train(preprocessed->g, cfg->c, outdir,
                                                 graph_path ? graph_path : "");
        if (out) *out = new dlsm_model{dlsm::load_checkpoint(r.checkpoint_path)};
    });
}

dlsm_status dlsm_model_save(const dlsm_model* m, const char* path) {
    if (auto rc = require(m && path, "dlsm_model_save: null argument")) return rc;
    return guarded([&] { dlsm::save_checkpoint(m->tm, path); });
}

dlsm_status dlsm_model_load(const char* path, dlsm_model** out) {
    if (auto rc = require(path && out, "dlsm_model_load: null argument")) return rc;
    return guarded([&] { *out = new dlsm_model{dlsm::load_checkpoint(path)}; });
}

void dlsm_model_free(dlsm_model* m) { delete m; }

/* ---- evaluation ---------------------------------------------------------- */

dlsm_status dlsm_eval_link_prediction(const dlsm_model* m, char** json_out) {
    if (auto rc = require(m && json_out, "dlsm_eval_link_prediction: null argument")) return rc;
    return guarded([&] {
        dlsm::EdgeSplit split = m->tm.resplit();
        *json_out = dup_string(dlsm::link_prediction_eval(m->tm, split).to_json());
    });
}

dlsm_status dlsm_eval_communities(const dlsm_model* m, const char* truth_path, int k,
                                  int min_community_size, char** json_out) {
    if (auto rc = require(m && json_out, "dlsm_eval_communities: null argument")) return rc;
    if (auto rc = require(truth_path != nullptr,
                          "community detection requires a truth labels file"))
        return rc;
    return guarded([&] {
        std::vector<int> truth =
            dlsm::load_truth_labels(m->tm.graph, truth_path, min_community_size);
        int kk = k;
        if (kk == 0) {
            std::map<int, int> seen;
            for (int t : truth)
                if (t >= 0) seen.emplace(t, 0);
            kk = static_cast<int>(seen.size());
        }
        *json_out = dup_string(dlsm::community_detection_eval(m->tm, truth, kk).to_json());
    });
}

dlsm_status dlsm_eval_factors(const dlsm_model* m, const char* series_csv_path, char** json_out) {
    if (auto rc = require(m && json_out, "dlsm_eval_factors: null argument")) return rc;
    return guarded([&] {
        dlsm::EvalReport report = dlsm::degree_factor_report(m->tm);
        if (series_csv_path) dlsm::write_series_csv(report.factor_distributions, series_csv_path);
        *json_out = dup_string(report.to_json());
    });
}

dlsm_status dlsm_export_embeddings(const dlsm_model* m, const char* path) {
    if (auto rc = require(m && path, "dlsm_export_embeddings: null argument")) return rc;
    return guarded([&] { dlsm::export_embeddings(m->tm, path); });
}

/* ---- aggregate runs ------------------------------------------------------ */

dlsm_status dlsm_repro(const dlsm_graph* preprocessed, const dlsm_config* base_cfg, int n_seeds,
                       const char* outdir, const char* dataset_name, const char* truth_path,
                       int k, int min_community_size, char** table_csv_out) {
    if (auto rc = require(preprocessed && base_cfg && outdir, "dlsm_repro: null argument"))
        return rc;
    return guarded([&] {
        dlsm::ReproOptions opts;
        opts.n_seeds = n_seeds;
        opts.dataset_name = dataset_name ? dataset_name : "dataset";
        if (truth_path) opts.truth_path = truth_path;
        opts.k = k;
        opts.min_community_size = min_community_size;
        std::string table = dlsm::run_repro(preprocessed->g, base_cfg->c, opts, outdir);
        if (table_csv_out) *table_csv_out = dup_string(table);
    });
}

} // extern "C"

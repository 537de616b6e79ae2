/* dlsm: latent-space representation learning for directed graphs.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every call returns a status code and
 * the last error message is available per thread via dlsm_last_error().
 */
#ifndef DLSM_H
#define DLSM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dlsm_status {
    DLSM_OK = 0,
    DLSM_ERROR_INTERNAL = 1,
    DLSM_ERROR_USAGE = 2,  /* bad arguments, bad config, contract violations */
    DLSM_ERROR_DATA = 3,   /* missing or malformed files */
    DLSM_ERROR_NUMERIC = 4 /* divergence or non-finite results */
} dlsm_status;

typedef struct dlsm_graph dlsm_graph;
typedef struct dlsm_config dlsm_config;
typedef struct dlsm_model dlsm_model;

/* Last error message for the calling thread; valid until the next failing
 * call. Never NULL. */
const char* dlsm_last_error(void);

/* Frees strings returned through char** out-parameters. */
void dlsm_string_free(char* s);

/* ---- graphs ------------------------------------------------------------ */

/* Loads a "src dst" edge list ('#' comments allowed). directed=0 inserts both
 * directions for every line. */
dlsm_status dlsm_graph_load(const char* path, int directed, dlsm_graph** out);

/* Attaches a node attribute CSV (label, then numeric columns). */
dlsm_status dlsm_graph_load_attributes(dlsm_graph* g, const char* path);

/* Removes self-loops and isolated nodes, re-compacting indices. */
dlsm_status dlsm_graph_preprocess(const dlsm_graph* g, dlsm_graph** out);

/* Descriptive statistics as JSON (V, E, CC, d_max_out, d_max_in, d_avg, ED,
 * RR). Requires a preprocessed graph with at least 2 nodes. */
dlsm_status dlsm_graph_stats_json(const dlsm_graph* g, char** json_out);

int64_t dlsm_graph_node_count(const dlsm_graph* g);
int64_t dlsm_graph_edge_count(const dlsm_graph* g);

void dlsm_graph_free(dlsm_graph* g);

/* ---- configuration ------------------------------------------------------ */

dlsm_status dlsm_config_create(dlsm_config** out);
dlsm_status dlsm_config_load(const char* path, dlsm_config** out);
dlsm_status dlsm_config_set(dlsm_config* c, const char* key, const char* value);
dlsm_status dlsm_config_serialize(const dlsm_config* c, char** text_out);
void dlsm_config_free(dlsm_config* c);

/* ---- training and checkpoints ------------------------------------------ */

/* Splits, trains, and returns the best-validation model in memory. */
dlsm_status dlsm_train(const dlsm_graph* preprocessed, const dlsm_config* cfg, dlsm_model** out);

/* Same, but also writes checkpoint.dlsm, history.csv and manifest.json into
 * outdir. graph_path may be empty; it is recorded in the manifest. */
dlsm_status dlsm_train_run(const dlsm_graph* preprocessed, const dlsm_config* cfg,
                           const char* outdir, const char* graph_path, dlsm_model** out);

dlsm_status dlsm_model_save(const dlsm_model* m, const char* path);
dlsm_status dlsm_model_load(const char* path, dlsm_model** out);
void dlsm_model_free(dlsm_model* m);

/* ---- evaluation ---------------------------------------------------------- */

/* Link prediction on the model's own test split (re-derived from the stored
 * seed). JSON report with auc and ap. */
dlsm_status dlsm_eval_link_prediction(const dlsm_model* m, char** json_out);

/* K-means community detection against a truth file ("node label" per line).
 * k=0 infers k from the truth labels; communities smaller than
 * min_community_size are excluded. */
dlsm_status dlsm_eval_communities(const dlsm_model* m, const char* truth_path, int k,
                                  int min_community_size, char** json_out);

/* Degree and factor-norm distribution report; when series_csv_path is not
 * NULL the aligned PDD/CCD series are also written there. */
dlsm_status dlsm_eval_factors(const dlsm_model* m, const char* series_csv_path, char** json_out);

/* CSV of node label, latent position, activity, popularity, memberships. */
dlsm_status dlsm_export_embeddings(const dlsm_model* m, const char* path);

/* ---- aggregate runs ------------------------------------------------------ */

/* Loops seeds 1..n_seeds through split/train/eval, resuming over completed
 * seeds; returns the aggregate mean+-sd table as CSV text. truth_path may be
 * NULL to skip community detection. */
dlsm_status dlsm_repro(const dlsm_graph* preprocessed, const dlsm_config* base_cfg, int n_seeds,
                       const char* outdir, const char* dataset_name, const char* truth_path,
                       int k, int min_community_size, char** table_csv_out);

#ifdef __cplusplus
}
#endif

#endif /* DLSM_H */

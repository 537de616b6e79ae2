#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trainer.hpp"

namespace dlsm {

// Aligned series for plotting; every series is a list of (x, y) points.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct EvalReport {
    std::string task; // lp | cd | factors
    std::optional<double> auc;
    std::optional<double> ap;
    std::optional<double> accuracy;
    uint64_t seed = 0;
    uint64_t split_seed = 0;
    std::string config_hash;
    std::vector<Series> factor_distributions;

    std::string to_json() const;
};

// AUC/AP over test positives and matched negatives, posterior-mean scores.
EvalReport link_prediction_eval(const TrainedModel& tm, const EdgeSplit& split);

// K-means on the posterior-mean latent positions; labels aligned by the
// node order of `truth` (one entry per node, -1 = excluded).
EvalReport community_detection_eval(const TrainedModel& tm, const std::vector<int>& truth, int k,
                                    uint64_t kmeans_seed = 0);

// Degree histograms and factor-norm distributions: PDD of out-/in-degrees and
// of reciprocal activity/popularity norms, plus log-scale CCDs.
EvalReport degree_factor_report(const TrainedModel& tm);

// CSV export: node label, positions (D), activity (D), popularity (D), then
// hard memberships for every decoder layer.
void export_embeddings(const TrainedModel& tm, const std::string& path);

// Truth labels file: "node_label community_label" per line, '#' comments.
// Returns per-node integer labels (-1 where missing) using the graph id_map;
// communities smaller than min_community_size are dropped to -1.
std::vector<int> load_truth_labels(const DirectedGraph& g, const std::string& path,
                                   int min_community_size = 0);

void write_series_csv(const std::vector<Series>& series, const std::string& path);

} // namespace dlsm

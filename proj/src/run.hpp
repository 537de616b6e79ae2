#pragma once

#include <optional>
#include <string>

#include "config.hpp"
#include "evaluation.hpp"
#include "trainer.hpp"

namespace dlsm {

// One training run in `outdir`: checkpoint, history.csv, manifest.json.
struct TrainRunResult {
    std::string checkpoint_path;
    std::string history_path;
    std::string manifest_path;
    double best_val_auc = 0.0;
};

TrainRunResult run_train(const DirectedGraph& preprocessed, const ModelConfig& cfg,
                         const std::string& outdir,
                         const std::string& graph_path_for_manifest = "");

// Load + preprocess + stats in one step.
std::string run_stats_json(const std::string& graph_path);

struct ReproOptions {
    int n_seeds = 10;
    std::string dataset_name = "dataset";
    std::optional<std::string> truth_path; // enables community detection rows
    int k = 0;                             // 0 => number of distinct truth labels
    int min_community_size = 0;
};

// Seeds 1..n through split/train/eval; resumes over completed seeds; returns
// the aggregate mean+-sd table as CSV text (also written to outdir).
std::string run_repro(const DirectedGraph& preprocessed, const ModelConfig& base,
                      const ReproOptions& opts, const std::string& outdir);

// Helpers shared with the C API
void ensure_dir(const std::string& path);
uint64_t file_digest(const std::string& path);
std::string json_escape(const std::string& s);

} // namespace dlsm

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "model.hpp"
#include "split.hpp"

namespace dlsm {

struct TrainHistoryRow {
    int epoch = 0;
    LossBreakdown loss;
    double val_auc = 0.0;
};

// A trained model plus everything needed to evaluate it: the full graph (for
// re-deriving splits) and the training trace.
struct TrainedModel {
    std::unique_ptr<Model> model;
    DirectedGraph graph; // full preprocessed graph, all edges
    uint64_t split_seed = 0;
    std::vector<TrainHistoryRow> history;
    int best_epoch = -1;
    double best_val_auc = 0.0;

    EdgeSplit resplit() const; // deterministic reconstruction of the split
};

// Full-batch reparameterized gradient training with Adam, early stopping on
// validation AUC; returns the best-validation checkpoint. Deterministic given
// (graph, split, config).
TrainedModel train(const DirectedGraph& graph, const EdgeSplit& split, const ModelConfig& cfg);

void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

void write_history_csv(const std::vector<TrainHistoryRow>& history, const std::string& path);

} // namespace dlsm

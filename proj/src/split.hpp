#pragma once

#include <cstdint>
#include <vector>

#include "graph.hpp"

namespace dlsm {

struct SplitRatios {
    double train = 0.85;
    double test = 0.10;
    double val = 0.05;
};

struct EdgeSplit {
    std::vector<Edge> train_pos;
    std::vector<Edge> val_pos;
    std::vector<Edge> test_pos;
    std::vector<Edge> val_neg;
    std::vector<Edge> test_neg;
    uint64_t seed = 0;
};

// Uniform random partition of the edges plus matched negative samples.
// Negatives are rejected against the *full* edge set and against each other,
// so no test positive can reappear as a validation negative. Deterministic
// given (graph, ratios, seed).
EdgeSplit split_edges(const DirectedGraph& g, const SplitRatios& ratios, uint64_t seed);

} // namespace dlsm

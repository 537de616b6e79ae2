#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dlsm {

using Edge = std::pair<int32_t, int32_t>;

// Directed graph with contiguous node ids. Edges are kept sorted and unique;
// the id_map remembers the original labels in first-appearance order.
struct DirectedGraph {
    int32_t n = 0;
    std::vector<Edge> edges; // sorted (src, dst), src != dst not guaranteed until preprocess()
    std::vector<std::string> id_map;
    std::optional<Eigen::MatrixXd> attributes; // n x p, row i = node i

    int64_t edge_count() const { return static_cast<int64_t>(edges.size()); }
    bool has_edge(int32_t src, int32_t dst) const;
    std::vector<int32_t> out_degrees() const;
    std::vector<int32_t> in_degrees() const;
};

struct GraphStats {
    int64_t n = 0;
    int64_t m = 0;
    double cc = 0.0; // directed clustering coefficient (Fagiolo)
    int64_t d_max_out = 0;
    int64_t d_max_in = 0;
    double d_avg = 0.0;
    double ed = 0.0; // edge density m / (n(n-1))
    double rr = 0.0; // reciprocal rate
};

// Edge-list file: one "src dst" per line, '#' comments ignored. Labels are
// arbitrary strings remapped to 0..n-1 in first-appearance order. Duplicate
// lines collapse to one edge. directed=false stores both directions.
DirectedGraph load_edge_list(const std::string& path, bool directed = true);

// Attribute CSV: first column node label, remaining columns numeric features.
// Nodes without a row get zero features; unknown labels are an error.
void load_attributes(DirectedGraph& g, const std::string& path);

// Drops self-loops, then nodes with total degree zero, re-compacting indices.
DirectedGraph preprocess(const DirectedGraph& g);

GraphStats descriptive_stats(const DirectedGraph& g);

std::string stats_to_json(const GraphStats& s);

} // namespace dlsm

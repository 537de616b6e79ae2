#pragma once

#include <cstdint>
#include <vector>

#include "graph.hpp"
#include "sparse.hpp"

namespace dlsm {

// Two-block planted partition: directed edges appear with p_in inside a block
// and p_out across blocks. Returns the graph and per-node block labels.
DirectedGraph planted_partition(int32_t n, double p_in, double p_out, uint64_t seed,
                                std::vector<int>* labels = nullptr);

// Directed graph with power-law out- and in-degree propensities
// (Pareto tail exponent `exponent`), built by weighted endpoint sampling.
DirectedGraph power_law_graph(int32_t n, double exponent, double avg_degree, uint64_t seed);

// Latent-space generative graph: a few Gaussian communities plus heavy-tailed
// node activity/popularity scales, edges drawn from the distance kernel.
DirectedGraph latent_space_graph(int32_t n, int communities, double avg_degree, uint64_t seed,
                                 std::vector<int>* labels = nullptr);

} // namespace dlsm

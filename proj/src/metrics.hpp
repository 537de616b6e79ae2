#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dlsm {

// Probability that a random positive outranks a random negative; ties half.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean precision at each positive's rank, descending scores, stable ties.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

// Lloyd iterations with k-means++ seeding; best of `restarts` by inertia.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, uint64_t seed, int restarts = 10,
                        int max_iters = 100);

// Maximum-weight bijection between label sets (Hungarian on the contingency
// matrix); returns the matched fraction.
double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// Exact solver for the assignment subproblem; maximizes total weight of a
// square cost matrix. Returns per-row column choices.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace dlsm

#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace dlsm {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw UsageError("auc: scores and labels must be non-empty and equal length");
    int64_t npos = std::count(labels.begin(), labels.end(), 1);
    int64_t nneg = static_cast<int64_t>(labels.size()) - npos;
    if (npos == 0 || nneg == 0) throw UsageError("auc: both classes must be present");

    // rank-sum with average ranks for ties
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    double u = rank_sum_pos - static_cast<double>(npos) * (static_cast<double>(npos) + 1.0) / 2.0;
    return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw UsageError("average_precision: scores and labels must be equal length");
    int64_t npos = std::count(labels.begin(), labels.end(), 1);
    if (npos == 0) throw UsageError("average_precision: needs at least one positive");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    int64_t hits = 0;
    for (size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]] == 1) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return ap / static_cast<double>(npos);
}

namespace {

double assign_clusters(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& centers,
                       std::vector<int>& labels) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            double d = (pts.row(i) - centers.row(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[static_cast<size_t>(i)] = arg;
        inertia += best;
    }
    return inertia;
}

} // namespace

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, uint64_t seed, int restarts,
                        int max_iters) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw UsageError("kmeans: k must be positive");
    if (k > n) throw UsageError("kmeans: k exceeds number of points");

    std::vector<int> best_labels(n, 0);
    double best_inertia = std::numeric_limits<double>::infinity();

    for (int r = 0; r < restarts; ++r) {
        RngStream rs = substream(seed, "kmeans", {static_cast<uint64_t>(r)});
        Eigen::MatrixXd centers(k, points.cols());

        // k-means++ seeding
        centers.row(0) = points.row(static_cast<Eigen::Index>(rs.below(n)));
        Eigen::VectorXd d2 =
            (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            double total = d2.sum();
            Eigen::Index pick = 0;
            if (total > 0.0) {
                double target = rs.uniform() * total;
                double acc = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    acc += d2(i);
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<Eigen::Index>(rs.below(n));
            }
            centers.row(c) = points.row(pick);
            d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }

        std::vector<int> labels(n, 0);
        double inertia = assign_clusters(points, centers, labels);
        for (int iter = 0; iter < max_iters; ++iter) {
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<int64_t> counts(k, 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                sums.row(labels[static_cast<size_t>(i)]) += points.row(i);
                counts[labels[static_cast<size_t>(i)]]++;
            }
            for (int c = 0; c < k; ++c) {
                if (counts[c] > 0)
                    centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
                // empty clusters keep their previous center
            }
            std::vector<int> next(n, 0);
            double next_inertia = assign_clusters(points, centers, next);
            bool changed = next != labels;
            labels = std::move(next);
            inertia = next_inertia;
            if (!changed) break;
        }
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
    // Hungarian algorithm (Jonker-style potentials), minimizing -weight.
    const int n = static_cast<int>(weight.rows());
    if (weight.cols() != n) throw UsageError("max_weight_assignment: matrix must be square");
    Eigen::MatrixXd cost = -weight;

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, n), way(n + 1, 0); // p[j]: row matched to column j
    for (int i = 0; i < n; ++i) {
        p[n] = i;
        int j0 = n;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != n);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 0; j < n; ++j)
        if (p[j] != n) row_to_col[p[j]] = j;
    return row_to_col;
}

double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw UsageError("clustering_accuracy: inputs must be non-empty and equal length");

    std::map<int, int> pmap, tmap;
    for (int p : predicted) pmap.emplace(p, static_cast<int>(pmap.size()));
    for (int t : truth) tmap.emplace(t, static_cast<int>(tmap.size()));
    int k = static_cast<int>(std::max(pmap.size(), tmap.size()));

    Eigen::MatrixXd contingency = Eigen::MatrixXd::Zero(k, k);
    for (size_t i = 0; i < predicted.size(); ++i)
        contingency(pmap[predicted[i]], tmap[truth[i]]) += 1.0;

    std::vector<int> match = max_weight_assignment(contingency);
    double correct = 0.0;
    for (int r = 0; r < k; ++r)
        if (match[r] >= 0) correct += contingency(r, match[r]);
    return correct / static_cast<double>(predicted.size());
}

namespace {
std::vector<double> ranks_with_ties(const std::vector<double>& x) {
    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(x.size(), 0.0);
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t q = i; q <= j; ++q) rank[order[q]] = avg;
        i = j + 1;
    }
    return rank;
}
} // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw UsageError("spearman_correlation: need two equal-length series");
    auto ra = ranks_with_ties(a);
    auto rb = ranks_with_ties(b);
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
    double num = 0.0, da = 0.0, db = 0.0;
    for (size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

} // namespace dlsm

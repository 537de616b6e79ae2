#include "split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "errors.hpp"
#include "rng.hpp"

namespace dlsm {

namespace {
inline uint64_t pair_key(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}
} // namespace

EdgeSplit split_edges(const DirectedGraph& g, const SplitRatios& ratios, uint64_t seed) {
    if (std::abs(ratios.train + ratios.test + ratios.val - 1.0) > 1e-9)
        throw UsageError("split ratios must sum to 1");
    const int64_t m = g.edge_count();
    const int64_t n = g.n;
    int64_t n_test = std::llround(ratios.test * static_cast<double>(m));
    int64_t n_val = std::llround(ratios.val * static_cast<double>(m));
    int64_t n_train = m - n_test - n_val;
    if (n_train < 1 || n_test < 1 || n_val < 1)
        throw UsageError("graph too small for the requested split ratios");

    const int64_t non_edges = n * (n - 1) - m;
    if (non_edges < n_test + n_val)
        throw DataError("graph too dense to sample enough negative pairs");

    // partition positives
    std::vector<int64_t> order(m);
    for (int64_t i = 0; i < m; ++i) order[i] = i;
    RngStream part = substream(seed, "split/partition");
    for (int64_t i = m - 1; i > 0; --i) {
        int64_t j = static_cast<int64_t>(part.below(static_cast<uint64_t>(i + 1)));
        std::swap(order[i], order[j]);
    }

    EdgeSplit out;
    out.seed = seed;
    out.test_pos.reserve(n_test);
    out.val_pos.reserve(n_val);
    out.train_pos.reserve(n_train);
    for (int64_t i = 0; i < m; ++i) {
        const Edge& e = g.edges[order[i]];
        if (i < n_test)
            out.test_pos.push_back(e);
        else if (i < n_test + n_val)
            out.val_pos.push_back(e);
        else
            out.train_pos.push_back(e);
    }
    std::sort(out.train_pos.begin(), out.train_pos.end());
    std::sort(out.val_pos.begin(), out.val_pos.end());
    std::sort(out.test_pos.begin(), out.test_pos.end());

    // negatives: uniform over non-edges, without replacement
    std::unordered_set<uint64_t> taken;
    taken.reserve(static_cast<size_t>(m + n_test + n_val) * 2);
    for (const auto& [s, t] : g.edges) taken.insert(pair_key(s, t));

    RngStream neg = substream(seed, "split/negatives");
    auto draw = [&](std::vector<Edge>& dst, int64_t count) {
        dst.reserve(count);
        int64_t guard = 0;
        const int64_t max_attempts = 200 * (count + 16) + 1000000;
        while (static_cast<int64_t>(dst.size()) < count) {
            if (++guard > max_attempts)
                throw DataError("negative sampling exhausted; graph too dense");
            auto i = static_cast<int32_t>(neg.below(static_cast<uint64_t>(n)));
            auto j = static_cast<int32_t>(neg.below(static_cast<uint64_t>(n)));
            if (i == j) continue;
            uint64_t key = pair_key(i, j);
            if (taken.count(key)) continue;
            taken.insert(key);
            dst.emplace_back(i, j);
        }
        std::sort(dst.begin(), dst.end());
    };
    draw(out.test_neg, n_test);
    draw(out.val_neg, n_val);
    return out;
}

} // namespace dlsm

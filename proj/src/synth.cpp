#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace dlsm {

namespace {
DirectedGraph finish(int32_t n, std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    DirectedGraph g;
    g.n = n;
    g.edges = std::move(edges);
    for (int32_t i = 0; i < n; ++i) g.id_map.push_back(std::to_string(i));
    return g;
}
} // namespace

DirectedGraph planted_partition(int32_t n, double p_in, double p_out, uint64_t seed,
                                std::vector<int>* labels) {
    RngStream rs = substream(seed, "synth/planted");
    std::vector<int> block(n);
    for (int32_t i = 0; i < n; ++i) block[i] = i < n / 2 ? 0 : 1;
    std::vector<Edge> edges;
    for (int32_t i = 0; i < n; ++i) {
        for (int32_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double p = block[i] == block[j] ? p_in : p_out;
            if (rs.uniform() < p) edges.emplace_back(i, j);
        }
    }
    if (labels) *labels = block;
    return finish(n, std::move(edges));
}

DirectedGraph power_law_graph(int32_t n, double exponent, double avg_degree, uint64_t seed) {
    if (exponent <= 1.0) throw UsageError("power_law_graph: exponent must exceed 1");
    RngStream rs = substream(seed, "synth/powerlaw");

    // Pareto(1, exponent-1) propensities give a degree tail ~ x^-exponent
    std::vector<double> out_w(n), in_w(n);
    double alpha = exponent - 1.0;
    for (int32_t i = 0; i < n; ++i) {
        out_w[i] = std::pow(rs.uniform(), -1.0 / alpha);
        in_w[i] = std::pow(rs.uniform(), -1.0 / alpha);
    }
    std::vector<double> out_cdf(n), in_cdf(n);
    double so = 0, si = 0;
    for (int32_t i = 0; i < n; ++i) {
        so += out_w[i];
        out_cdf[i] = so;
        si += in_w[i];
        in_cdf[i] = si;
    }
    auto draw = [&](const std::vector<double>& cdf, double total) {
        double u = rs.uniform() * total;
        return static_cast<int32_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    };

    int64_t target = static_cast<int64_t>(avg_degree * n);
    std::vector<Edge> edges;
    edges.reserve(target);
    int64_t attempts = 0;
    while (static_cast<int64_t>(edges.size()) < target && attempts < 50 * target) {
        ++attempts;
        int32_t s = draw(out_cdf, so);
        int32_t t = draw(in_cdf, si);
        if (s == t) continue;
        edges.emplace_back(s, t);
        if (attempts % (4 * target) == 0) { // periodic dedup to bound growth
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        }
    }
    return finish(n, std::move(edges));
}

DirectedGraph latent_space_graph(int32_t n, int communities, double avg_degree, uint64_t seed,
                                 std::vector<int>* labels) {
    RngStream rs = substream(seed, "synth/latent");
    const int d = 2;
    std::vector<int> comm(n);
    MatRM z(n, d);
    std::vector<double> act(n), pop(n);
    for (int32_t i = 0; i < n; ++i) {
        comm[i] = static_cast<int>(rs.below(communities));
        double angle = 2.0 * M_PI * comm[i] / communities;
        z(i, 0) = 3.0 * std::cos(angle) + 0.6 * rs.normal();
        z(i, 1) = 3.0 * std::sin(angle) + 0.6 * rs.normal();
        act[i] = std::pow(rs.uniform(), 1.2); // heavy spread of sending scales
        pop[i] = std::pow(rs.uniform(), 1.2);
    }

    // calibrate the bias so the expected degree lands near avg_degree
    auto kernel = [&](int32_t i, int32_t j, double b0) {
        double dist = (z.row(i) - z.row(j)).norm();
        double x = b0 - act[i] * dist - pop[j] * dist;
        return 1.0 / (1.0 + std::exp(-x));
    };
    double lo = -10, hi = 10;
    for (int iter = 0; iter < 30; ++iter) {
        double b0 = 0.5 * (lo + hi);
        double exp_deg = 0.0;
        int samples = 4000;
        RngStream probe = substream(seed, "synth/latent-probe", {static_cast<uint64_t>(iter)});
        for (int s = 0; s < samples; ++s) {
            auto i = static_cast<int32_t>(probe.below(n));
            auto j = static_cast<int32_t>(probe.below(n));
            if (i == j) continue;
            exp_deg += kernel(i, j, b0) * n;
        }
        exp_deg /= samples;
        if (exp_deg > avg_degree)
            hi = b0;
        else
            lo = b0;
    }
    double b0 = 0.5 * (lo + hi);

    std::vector<Edge> edges;
    for (int32_t i = 0; i < n; ++i)
        for (int32_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rs.uniform() < kernel(i, j, b0)) edges.emplace_back(i, j);
        }
    if (labels) *labels = comm;
    return finish(n, std::move(edges));
}

} // namespace dlsm

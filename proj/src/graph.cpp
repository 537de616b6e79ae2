#include "graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "errors.hpp"

#include <nlohmann/json.hpp>

namespace dlsm {

bool DirectedGraph::has_edge(int32_t src, int32_t dst) const {
    return std::binary_search(edges.begin(), edges.end(), Edge{src, dst});
}

std::vector<int32_t> DirectedGraph::out_degrees() const {
    std::vector<int32_t> d(n, 0);
    for (const auto& [s, t] : edges) d[s]++;
    return d;
}

std::vector<int32_t> DirectedGraph::in_degrees() const {
    std::vector<int32_t> d(n, 0);
    for (const auto& [s, t] : edges) d[t]++;
    return d;
}

DirectedGraph load_edge_list(const std::string& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list: " + path);

    DirectedGraph g;
    std::unordered_map<std::string, int32_t> ids;
    auto intern = [&](const std::string& label) {
        auto it = ids.find(label);
        if (it != ids.end()) return it->second;
        int32_t id = static_cast<int32_t>(g.id_map.size());
        ids.emplace(label, id);
        g.id_map.push_back(label);
        return id;
    };

    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b)) {
            throw DataError("malformed edge at line " + std::to_string(lineno) + " of " + path);
        }
        if (ls >> extra) {
            throw DataError("malformed edge (more than two fields) at line " + std::to_string(lineno) +
                            " of " + path);
        }
        int32_t u = intern(a), v = intern(b);
        g.edges.emplace_back(u, v);
        if (!directed && u != v) g.edges.emplace_back(v, u);
    }
    if (g.edges.empty()) throw DataError("empty graph: no edges in " + path);

    g.n = static_cast<int32_t>(g.id_map.size());
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
}

void load_attributes(DirectedGraph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open attribute file: " + path);

    std::unordered_map<std::string, int32_t> ids;
    for (int32_t i = 0; i < g.n; ++i) ids.emplace(g.id_map[i], i);

    std::vector<std::vector<double>> rows;
    std::vector<int32_t> row_nodes;
    std::string line;
    int64_t lineno = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2)
            throw DataError("attribute row needs a label and at least one value, line " +
                            std::to_string(lineno));
        auto it = ids.find(cells[0]);
        if (it == ids.end())
            throw DataError("attribute row for unknown node '" + cells[0] + "' at line " +
                            std::to_string(lineno));
        std::vector<double> vals;
        for (size_t c = 1; c < cells.size(); ++c) {
            try {
                vals.push_back(std::stod(cells[c]));
            } catch (const std::exception&) {
                throw DataError("non-numeric attribute at line " + std::to_string(lineno));
            }
        }
        if (width == 0) width = vals.size();
        if (vals.size() != width)
            throw DataError("inconsistent attribute width at line " + std::to_string(lineno));
        rows.push_back(std::move(vals));
        row_nodes.push_back(it->second);
    }
    if (rows.empty()) throw DataError("attribute file has no data rows: " + path);

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(g.n, static_cast<Eigen::Index>(width));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < width; ++c) X(row_nodes[r], static_cast<Eigen::Index>(c)) = rows[r][c];
    g.attributes = std::move(X);
}

DirectedGraph preprocess(const DirectedGraph& g) {
    std::vector<char> alive(g.n, 0);
    std::vector<Edge> kept;
    kept.reserve(g.edges.size());
    for (const auto& [s, t] : g.edges) {
        if (s == t) continue;
        kept.emplace_back(s, t);
        alive[s] = 1;
        alive[t] = 1;
    }

    std::vector<int32_t> remap(g.n, -1);
    DirectedGraph out;
    for (int32_t i = 0; i < g.n; ++i) {
        if (!alive[i]) continue;
        remap[i] = static_cast<int32_t>(out.id_map.size());
        out.id_map.push_back(g.id_map.empty() ? std::to_string(i) : g.id_map[i]);
    }
    out.n = static_cast<int32_t>(out.id_map.size());
    if (out.n == 0) throw DataError("empty graph after preprocessing");

    out.edges.reserve(kept.size());
    for (const auto& [s, t] : kept) out.edges.emplace_back(remap[s], remap[t]);
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());

    if (g.attributes) {
        Eigen::MatrixXd X(out.n, g.attributes->cols());
        for (int32_t i = 0; i < g.n; ++i)
            if (remap[i] >= 0) X.row(remap[i]) = g.attributes->row(i);
        out.attributes = std::move(X);
    }
    return out;
}

namespace {

// Fagiolo's directed clustering coefficient on the binary adjacency:
// cc_i = (A + A^T)^3_ii / (2 (d_i(d_i - 1) - 2 d_i^rec)), averaged over the
// nodes with a positive denominator.
double directed_clustering(const DirectedGraph& g) {
    const int32_t n = g.n;
    std::vector<std::vector<int32_t>> nbr(n); // union neighbourhood, with both directions
    std::vector<int64_t> dtot(n, 0), drec(n, 0);

    std::vector<std::vector<int32_t>> out_adj(n), in_adj(n);
    for (const auto& [s, t] : g.edges) {
        out_adj[s].push_back(t);
        in_adj[t].push_back(s);
        dtot[s]++;
        dtot[t]++;
    }
    for (int32_t i = 0; i < n; ++i) {
        std::sort(out_adj[i].begin(), out_adj[i].end());
        std::sort(in_adj[i].begin(), in_adj[i].end());
        std::merge(out_adj[i].begin(), out_adj[i].end(), in_adj[i].begin(), in_adj[i].end(),
                   std::back_inserter(nbr[i]));
        // entries appearing twice are reciprocal partners
        int64_t rec = 0;
        for (size_t k = 1; k < nbr[i].size(); ++k)
            if (nbr[i][k] == nbr[i][k - 1]) rec++;
        drec[i] = rec;
    }

    // (A+A^T)^3_ii = sum over pairs (j,k) of b_ij b_jk b_ki with b = a_ij + a_ji
    auto b = [&](int32_t u, int32_t v) -> int {
        int val = 0;
        if (std::binary_search(out_adj[u].begin(), out_adj[u].end(), v)) val++;
        if (std::binary_search(in_adj[u].begin(), in_adj[u].end(), v)) val++;
        return val;
    };

    double total = 0.0;
    int64_t counted = 0;
    for (int32_t i = 0; i < n; ++i) {
        int64_t denom = dtot[i] * (dtot[i] - 1) - 2 * drec[i];
        if (denom <= 0) continue;
        ++counted;
        // walk distinct neighbours of i
        double tri = 0.0;
        std::vector<int32_t> uniq(nbr[i]);
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (size_t aj = 0; aj < uniq.size(); ++aj) {
            int32_t j = uniq[aj];
            int bij = b(i, j);
            if (!bij) continue;
            for (size_t ak = 0; ak < uniq.size(); ++ak) {
                if (ak == aj) continue;
                int32_t k = uniq[ak];
                int bjk = b(j, k);
                if (!bjk) continue;
                tri += static_cast<double>(bij) * bjk * b(k, i);
            }
        }
        total += tri / (2.0 * static_cast<double>(denom));
    }
    return counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

} // namespace

GraphStats descriptive_stats(const DirectedGraph& g) {
    if (g.n < 2) throw DataError("descriptive stats undefined for graphs with fewer than 2 nodes");
    GraphStats s;
    s.n = g.n;
    s.m = g.edge_count();
    auto dout = g.out_degrees();
    auto din = g.in_degrees();
    s.d_max_out = *std::max_element(dout.begin(), dout.end());
    s.d_max_in = *std::max_element(din.begin(), din.end());
    s.d_avg = static_cast<double>(s.m) / static_cast<double>(s.n);
    s.ed = static_cast<double>(s.m) / (static_cast<double>(s.n) * (static_cast<double>(s.n) - 1.0));

    int64_t recip = 0;
    for (const auto& [a, b] : g.edges)
        if (a < b && g.has_edge(b, a)) recip++;
    s.rr = s.m > 0 ? 2.0 * static_cast<double>(recip) / static_cast<double>(s.m) : 0.0;

    s.cc = directed_clustering(g);
    return s;
}

std::string stats_to_json(const GraphStats& s) {
    nlohmann::ordered_json j;
    j["V"] = s.n;
    j["E"] = s.m;
    j["CC"] = s.cc;
    j["d_max_out"] = s.d_max_out;
    j["d_max_in"] = s.d_max_in;
    j["d_avg"] = s.d_avg;
    j["ED"] = s.ed;
    j["RR"] = s.rr;
    return j.dump(2);
}

} // namespace dlsm

#include "sparse.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace dlsm {

double Csr::at(int32_t r, int32_t c) const {
    for (int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col_idx[k] == c) return values[k];
    return 0.0;
}

Csr Csr::transposed() const {
    Csr t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(cols + 1, 0);
    t.col_idx.resize(col_idx.size());
    t.values.resize(values.size());
    for (int32_t c : col_idx) t.row_ptr[c + 1]++;
    for (int32_t r = 0; r < t.rows; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
    std::vector<int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int32_t r = 0; r < rows; ++r) {
        for (int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            int64_t pos = cursor[col_idx[k]]++;
            t.col_idx[pos] = r;
            t.values[pos] = values[k];
        }
    }
    return t;
}

MatRM Csr::dense() const {
    MatRM d = MatRM::Zero(rows, cols);
    for (int32_t r = 0; r < rows; ++r)
        for (int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d(r, col_idx[k]) = values[k];
    return d;
}

Csr Csr::from_edges(int32_t n, const std::vector<Edge>& edges, double value) {
    Csr a;
    a.rows = n;
    a.cols = n;
    a.row_ptr.assign(n + 1, 0);
    a.col_idx.reserve(edges.size());
    a.values.reserve(edges.size());
    for (const auto& [s, t] : edges) a.row_ptr[s + 1]++;
    for (int32_t r = 0; r < n; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
    for (const auto& [s, t] : edges) {
        a.col_idx.push_back(t);
        a.values.push_back(value);
    }
    return a;
}

MatRM spmm(const Csr& a, const Eigen::Ref<const MatRM>& x) {
    if (a.cols != x.rows()) throw NumericError("spmm dimension mismatch");
    MatRM y = MatRM::Zero(a.rows, x.cols());
    for (int32_t r = 0; r < a.rows; ++r) {
        auto yr = y.row(r);
        for (int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            yr += a.values[k] * x.row(a.col_idx[k]);
    }
    return y;
}

Csr normalize_adjacency(int32_t n, const std::vector<Edge>& edges) {
    // A + I with sorted unique entries
    std::vector<Edge> with_self;
    with_self.reserve(edges.size() + n);
    for (int32_t i = 0; i < n; ++i) with_self.emplace_back(i, i);
    with_self.insert(with_self.end(), edges.begin(), edges.end());
    std::sort(with_self.begin(), with_self.end());
    with_self.erase(std::unique(with_self.begin(), with_self.end()), with_self.end());

    std::vector<double> dout(n, 0.0), din(n, 0.0);
    for (const auto& [s, t] : with_self) {
        dout[s] += 1.0;
        din[t] += 1.0;
    }

    Csr a = Csr::from_edges(n, with_self);
    for (int32_t r = 0; r < n; ++r) {
        for (int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            a.values[k] = 1.0 / std::sqrt(dout[r] * din[a.col_idx[k]]);
    }
    return a;
}

} // namespace dlsm

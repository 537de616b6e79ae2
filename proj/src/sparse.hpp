#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "graph.hpp"

namespace dlsm {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Minimal CSR for the few sparse products the model needs.
struct Csr {
    int32_t rows = 0;
    int32_t cols = 0;
    std::vector<int64_t> row_ptr; // rows+1
    std::vector<int32_t> col_idx;
    std::vector<double> values;

    int64_t nnz() const { return static_cast<int64_t>(col_idx.size()); }
    double at(int32_t r, int32_t c) const;
    Csr transposed() const;
    MatRM dense() const;

    // edges must be sorted unique (src,dst); one value per edge
    static Csr from_edges(int32_t n, const std::vector<Edge>& edges, double value = 1.0);
};

// y = A * x, dense x
MatRM spmm(const Csr& a, const Eigen::Ref<const MatRM>& x);

// A-hat = D_out^(-1/2) (A + I) D_in^(-1/2) on the training adjacency; the
// added identity guarantees every degree is at least one.
Csr normalize_adjacency(int32_t n, const std::vector<Edge>& edges);

} // namespace dlsm

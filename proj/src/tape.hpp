#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sparse.hpp"

namespace dlsm::ad {

using dlsm::Csr;
using dlsm::Edge;
using dlsm::MatRM;

class Tape;

struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
    const MatRM& val() const;
    Eigen::Index rows() const { return val().rows(); }
    Eigen::Index cols() const { return val().cols(); }
};

// Define-by-run reverse-mode tape over dense row-major matrices. Creation
// order is the topological order, so the backward sweep is a reverse walk.
class Tape {
public:
    using BackFn = std::function<void(Tape&, int)>;

    Var leaf(MatRM value, bool requires_grad = false);
    Var constant(MatRM value) { return leaf(std::move(value), false); }
    Var constant(double value);

    Var make(MatRM value, const std::vector<int>& parents, BackFn back);

    void backward(Var root);

    const MatRM& val(int id) const { return nodes_[id].value; }
    bool needs_grad(int id) const { return nodes_[id].requires_grad; }
    bool has_grad(int id) const { return nodes_[id].grad_set; }
    const MatRM& grad(int id) const;
    // accumulate into a parent's gradient buffer
    void accum(int id, const MatRM& g);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        MatRM value;
        MatRM grad;
        BackFn back;
        bool requires_grad = false;
        bool grad_set = false;
    };
    std::vector<Node> nodes_;
};

double scalar(Var v);

// elementwise / broadcast
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add(Var a, double c);
Var scale(Var a, double c);
Var add_rowvec(Var a, Var r);    // r: 1 x m
Var sub_rowvec(Var a, Var r);
Var mul_rowvec(Var a, Var r);
Var add_scalarvar(Var a, Var s); // s: 1 x 1
Var mul_scalarvar(Var a, Var s);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator+(Var a, double c) { return add(a, c); }
inline Var operator-(Var a, double c) { return add(a, -c); }
inline Var operator*(Var a, double c) { return scale(a, c); }
inline Var operator*(double c, Var a) { return scale(a, c); }

// structure
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b); // a * b^T
Var spmm(const Csr* a, const Csr* a_t, Var x);
Var concat_cols(const std::vector<Var>& parts);
Var sum(Var a);    // -> 1x1
Var colsum(Var a); // n x m -> 1 x m

// nonlinearities
Var sigmoid(Var a);
Var softplus(Var a);
Var logit(Var a);
Var log_(Var a);
Var exp_(Var a);
Var sqrt_(Var a);
Var square(Var a);
Var leaky_relu(Var a, double slope);
Var lgamma_(Var a);
Var digamma_(Var a);
Var clamp(Var a, double lo, double hi);

// per-column softmax; keeps every column on the simplex
Var softmax_cols(Var u);
// y(i,g) = factor * x(i,g) / sum_i x(i,g)
Var colnorm_scale(Var x, double factor);

// pathwise Gamma(alpha, 1) sample per entry; derivative wrt alpha recorded
Var gamma_sample(Var alpha, uint64_t seed, double min_shape = 8.0);

// r(i,j) = || s_i . (z_i - z_j) ||_2 with zero diagonal
Var pairwise_dist_rowscale(Var z, Var s);
// q(i,j) = || s_j . (z_i - z_j) ||_2 with zero diagonal
Var pairwise_dist_colscale(Var z, Var s);
// the same distances over an explicit pair list; result is k x 1
using PairList = std::shared_ptr<const std::vector<Edge>>;
Var pair_dist_rowscale(Var z, Var s, PairList pairs);
Var pair_dist_colscale(Var z, Var s, PairList pairs);
// out_k = u(i_k, :) . v(j_k, :)
Var pair_inner_product(Var u, Var v, PairList pairs);

// weighted Bernoulli cross-entropy against a sparse 0/1 adjacency, diagonal
// excluded: sum over i != j of w*a*softplus(-x) + (1-a)*softplus(x)
Var bce_full(Var logits, const Csr* adj, double pos_weight);
// pair-list estimator: pos terms weighted by pos_weight, neg terms rescaled
Var bce_pairs(Var pos_logits, Var neg_logits, double pos_weight, double neg_scale);

} // namespace dlsm::ad

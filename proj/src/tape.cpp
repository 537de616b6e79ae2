#include "tape.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace dlsm::ad {

namespace {

inline double stable_softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}
inline double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw NumericError(std::string(op) + ": shape mismatch");
}

} // namespace

const MatRM& Var::val() const { return tape->val(id); }

Var Tape::leaf(MatRM value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(double value) {
    MatRM m(1, 1);
    m(0, 0) = value;
    return leaf(std::move(m), false);
}

Var Tape::make(MatRM value, const std::vector<int>& parents, BackFn back) {
    bool req = false;
    for (int p : parents) req = req || nodes_[p].requires_grad;
    Node n;
    n.value = std::move(value);
    n.requires_grad = req;
    if (req) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accum(int id, const MatRM& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad_set) {
        n.grad = g;
        n.grad_set = true;
    } else {
        n.grad += g;
    }
}

const MatRM& Tape::grad(int id) const {
    if (!nodes_[id].grad_set) throw NumericError("gradient not computed for node");
    return nodes_[id].grad;
}

void Tape::backward(Var root) {
    if (root.tape != this) throw NumericError("backward: var from another tape");
    if (val(root.id).size() != 1) throw NumericError("backward expects a scalar root");
    MatRM seed(1, 1);
    seed(0, 0) = 1.0;
    accum(root.id, seed);
    for (int id = root.id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad_set && n.back) n.back(*this, id);
    }
}

double scalar(Var v) {
    if (v.val().size() != 1) throw NumericError("scalar() on non-scalar var");
    return v.val()(0, 0);
}

// ---------------------------------------------------------------------------
// elementwise and broadcast ops

Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Tape& t = *a.tape;
    int ia = a.id, ib = b.id;
    return t.make(a.val() + b.val(), {ia, ib}, [ia, ib](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, g);
        t.accum(ib, g);
    });
}

Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Tape& t = *a.tape;
    int ia = a.id, ib = b.id;
    return t.make(a.val() - b.val(), {ia, ib}, [ia, ib](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, g);
        t.accum(ib, MatRM(-g));
    });
}

Var mul(Var a, Var b) {
    check_same_shape(a, b, "mul");
    Tape& t = *a.tape;
    int ia = a.id, ib = b.id;
    return t.make(a.val().cwiseProduct(b.val()), {ia, ib}, [ia, ib](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        if (t.needs_grad(ia)) t.accum(ia, g.cwiseProduct(t.val(ib)));
        if (t.needs_grad(ib)) t.accum(ib, g.cwiseProduct(t.val(ia)));
    });
}

Var add(Var a, double c) {
    Tape& t = *a.tape;
    int ia = a.id;
    return t.make(a.val().array() + c, {ia},
                  [ia](Tape& t, int self) { t.accum(ia, t.grad(self)); });
}

Var scale(Var a, double c) {
    Tape& t = *a.tape;
    int ia = a.id;
    return t.make(a.val() * c, {ia},
                  [ia, c](Tape& t, int self) { t.accum(ia, MatRM(t.grad(self) * c)); });
}

Var add_rowvec(Var a, Var r) {
    if (r.rows() != 1 || r.cols() != a.cols()) throw NumericError("add_rowvec: bad shapes");
    Tape& t = *a.tape;
    int ia = a.id, ir = r.id;
    MatRM out = a.val();
    out.rowwise() += r.val().row(0);
    return t.make(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, g);
        if (t.needs_grad(ir)) t.accum(ir, MatRM(g.colwise().sum()));
    });
}

Var sub_rowvec(Var a, Var r) {
    if (r.rows() != 1 || r.cols() != a.cols()) throw NumericError("sub_rowvec: bad shapes");
    Tape& t = *a.tape;
    int ia = a.id, ir = r.id;
    MatRM out = a.val();
    out.rowwise() -= r.val().row(0);
    return t.make(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, g);
        if (t.needs_grad(ir)) t.accum(ir, MatRM(-g.colwise().sum()));
    });
}

Var mul_rowvec(Var a, Var r) {
    if (r.rows() != 1 || r.cols() != a.cols()) throw NumericError("mul_rowvec: bad shapes");
    Tape& t = *a.tape;
    int ia = a.id, ir = r.id;
    MatRM out = a.val().array().rowwise() * r.val().row(0).array();
    return t.make(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        if (t.needs_grad(ia)) t.accum(ia, MatRM(g.array().rowwise() * t.val(ir).row(0).array()));
        if (t.needs_grad(ir))
            t.accum(ir, MatRM(g.cwiseProduct(t.val(ia)).colwise().sum()));
    });
}

Var add_scalarvar(Var a, Var s) {
    if (s.val().size() != 1) throw NumericError("add_scalarvar: s must be 1x1");
    Tape& t = *a.tape;
    int ia = a.id, is = s.id;
    return t.make(a.val().array() + s.val()(0, 0), {ia, is}, [ia, is](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, g);
        if (t.needs_grad(is)) {
            MatRM gs(1, 1);
            gs(0, 0) = g.sum();
            t.accum(is, gs);
        }
    });
}

Var mul_scalarvar(Var a, Var s) {
    if (s.val().size() != 1) throw NumericError("mul_scalarvar: s must be 1x1");
    Tape& t = *a.tape;
    int ia = a.id, is = s.id;
    return t.make(a.val() * s.val()(0, 0), {ia, is}, [ia, is](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        if (t.needs_grad(ia)) t.accum(ia, MatRM(g * t.val(is)(0, 0)));
        if (t.needs_grad(is)) {
            MatRM gs(1, 1);
            gs(0, 0) = g.cwiseProduct(t.val(ia)).sum();
            t.accum(is, gs);
        }
    });
}

// ---------------------------------------------------------------------------
// structural ops

Var matmul(Var a, Var b) {
    if (a.cols() != b.rows()) throw NumericError("matmul: inner dimensions disagree");
    Tape& t = *a.tape;
    int ia = a.id, ib = b.id;
    return t.make(a.val() * b.val(), {ia, ib}, [ia, ib](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        if (t.needs_grad(ia)) t.accum(ia, MatRM(g * t.val(ib).transpose()));
        if (t.needs_grad(ib)) t.accum(ib, MatRM(t.val(ia).transpose() * g));
    });
}

Var matmul_nt(Var a, Var b) {
    if (a.cols() != b.cols()) throw NumericError("matmul_nt: inner dimensions disagree");
    Tape& t = *a.tape;
    int ia = a.id, ib = b.id;
    return t.make(a.val() * b.val().transpose(), {ia, ib}, [ia, ib](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        if (t.needs_grad(ia)) t.accum(ia, MatRM(g * t.val(ib)));
        if (t.needs_grad(ib)) t.accum(ib, MatRM(g.transpose() * t.val(ia)));
    });
}

Var spmm(const Csr* a, const Csr* a_t, Var x) {
    Tape& t = *x.tape;
    int ix = x.id;
    return t.make(dlsm::spmm(*a, x.val()), {ix}, [a_t, ix](Tape& t, int self) {
        if (t.needs_grad(ix)) t.accum(ix, dlsm::spmm(*a_t, t.grad(self)));
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw NumericError("concat_cols: empty");
    Tape& t = *parts[0].tape;
    Eigen::Index rows = parts[0].rows(), cols = 0;
    std::vector<int> ids;
    std::vector<Eigen::Index> widths;
    for (const Var& p : parts) {
        if (p.rows() != rows) throw NumericError("concat_cols: row mismatch");
        cols += p.cols();
        ids.push_back(p.id);
        widths.push_back(p.cols());
    }
    MatRM out(rows, cols);
    Eigen::Index off = 0;
    for (const Var& p : parts) {
        out.middleCols(off, p.cols()) = p.val();
        off += p.cols();
    }
    return t.make(std::move(out), ids, [ids, widths](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        Eigen::Index off = 0;
        for (size_t k = 0; k < ids.size(); ++k) {
            if (t.needs_grad(ids[k])) t.accum(ids[k], MatRM(g.middleCols(off, widths[k])));
            off += widths[k];
        }
    });
}

Var sum(Var a) {
    Tape& t = *a.tape;
    int ia = a.id;
    MatRM out(1, 1);
    out(0, 0) = a.val().sum();
    Eigen::Index r = a.rows(), c = a.cols();
    return t.make(std::move(out), {ia}, [ia, r, c](Tape& t, int self) {
        double g = t.grad(self)(0, 0);
        t.accum(ia, MatRM(MatRM::Constant(r, c, g)));
    });
}

Var colsum(Var a) {
    Tape& t = *a.tape;
    int ia = a.id;
    Eigen::Index r = a.rows();
    return t.make(a.val().colwise().sum(), {ia}, [ia, r](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        t.accum(ia, MatRM(g.replicate(r, 1)));
    });
}

// ---------------------------------------------------------------------------
// nonlinearities

namespace {
template <typename F, typename D>
Var unary(Var a, F fwd, D dval) {
    Tape& t = *a.tape;
    int ia = a.id;
    MatRM out = a.val().unaryExpr(fwd);
    return t.make(std::move(out), {ia}, [ia, dval](Tape& t, int self) {
        if (!t.needs_grad(ia)) return;
        const MatRM& g = t.grad(self);
        const MatRM& x = t.val(ia);
        const MatRM& y = t.val(self);
        MatRM gx(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.size(); ++i)
            gx.data()[i] = g.data()[i] * dval(x.data()[i], y.data()[i]);
        t.accum(ia, gx);
    });
}
} // namespace

Var sigmoid(Var a) {
    return unary(
        a, [](double x) { return sigmoid_d(x); },
        [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Var a) {
    return unary(
        a, [](double x) { return stable_softplus(x); },
        [](double x, double) { return sigmoid_d(x); });
}

Var logit(Var a) {
    return unary(
        a, [](double x) { return std::log(x) - std::log1p(-x); },
        [](double x, double) { return 1.0 / (x * (1.0 - x)); });
}

Var log_(Var a) {
    return unary(
        a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var exp_(Var a) {
    return unary(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var sqrt_(Var a) {
    return unary(
        a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; });
}

Var square(Var a) {
    return unary(
        a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var leaky_relu(Var a, double slope) {
    return unary(
        a, [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var lgamma_(Var a) {
    return unary(
        a, [](double x) { return std::lgamma(x); },
        [](double x, double) { return boost::math::digamma(x); });
}

Var digamma_(Var a) {
    return unary(
        a, [](double x) { return boost::math::digamma(x); },
        [](double x, double) { return boost::math::trigamma(x); });
}

Var clamp(Var a, double lo, double hi) {
    return unary(
        a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
        [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var softmax_cols(Var u) {
    Tape& t = *u.tape;
    int iu = u.id;
    MatRM y = u.val();
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        double mx = y.col(c).maxCoeff();
        y.col(c) = (y.col(c).array() - mx).exp();
        y.col(c) /= y.col(c).sum();
    }
    return t.make(std::move(y), {iu}, [iu](Tape& t, int self) {
        if (!t.needs_grad(iu)) return;
        const MatRM& g = t.grad(self);
        const MatRM& y = t.val(self);
        MatRM gu(g.rows(), g.cols());
        for (Eigen::Index c = 0; c < g.cols(); ++c) {
            double dot = g.col(c).dot(y.col(c));
            gu.col(c) = y.col(c).cwiseProduct(g.col(c)) - dot * y.col(c);
        }
        t.accum(iu, gu);
    });
}

Var colnorm_scale(Var x, double factor) {
    Tape& t = *x.tape;
    int ix = x.id;
    const MatRM& xv = x.val();
    Eigen::RowVectorXd csum = xv.colwise().sum();
    MatRM y = factor * (xv.array().rowwise() / csum.array());
    return t.make(std::move(y), {ix}, [ix, factor, csum](Tape& t, int self) {
        if (!t.needs_grad(ix)) return;
        const MatRM& g = t.grad(self);
        const MatRM& x = t.val(ix);
        Eigen::RowVectorXd dot = g.cwiseProduct(x).colwise().sum(); // sum_i g_ig x_ig
        MatRM gx(g.rows(), g.cols());
        for (Eigen::Index c = 0; c < g.cols(); ++c) {
            double cg = csum(c);
            gx.col(c) = ((g.col(c).array() * cg - dot(c)) * (factor / (cg * cg))).matrix();
        }
        t.accum(ix, gx);
    });
}

// ---------------------------------------------------------------------------
// sampling

Var gamma_sample(Var alpha, uint64_t seed, double min_shape) {
    Tape& t = *alpha.tape;
    int ia = alpha.id;
    const MatRM& av = alpha.val();
    MatRM out(av.rows(), av.cols());
    auto dshape = std::make_shared<MatRM>(av.rows(), av.cols());
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
        for (Eigen::Index j = 0; j < av.cols(); ++j) {
            double a = av(i, j);
            if (!(a > 0.0)) throw NumericError("gamma_sample: non-positive shape");
            RngStream rs = substream(seed, {static_cast<uint64_t>(i), static_cast<uint64_t>(j)});
            double d;
            out(i, j) = rs.gamma(a, &d, min_shape);
            (*dshape)(i, j) = d;
        }
    }
    return t.make(std::move(out), {ia}, [ia, dshape](Tape& t, int self) {
        if (t.needs_grad(ia)) t.accum(ia, MatRM(t.grad(self).cwiseProduct(*dshape)));
    });
}

// ---------------------------------------------------------------------------
// pairwise distance kernels

namespace {

// shared forward for row- and column-scaled distances; scale_by_row selects
// whether s is indexed by the first or the second node of the pair
MatRM pairwise_forward(const MatRM& z, const MatRM& s, bool scale_by_row) {
    const Eigen::Index n = z.rows(), d = z.cols();
    MatRM r = MatRM::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* zi = z.row(i).data();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double* zj = z.row(j).data();
            const double* sc = scale_by_row ? s.row(i).data() : s.row(j).data();
            double acc = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                double w = sc[k] * (zi[k] - zj[k]);
                acc += w * w;
            }
            r(i, j) = std::sqrt(acc);
        }
    }
    return r;
}

void pairwise_backward(const MatRM& g, const MatRM& r, const MatRM& z, const MatRM& s,
                       bool scale_by_row, MatRM* gz, MatRM* gs) {
    const Eigen::Index n = z.rows(), d = z.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* zi = z.row(i).data();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            double gij = g(i, j);
            if (gij == 0.0) continue;
            double rij = r(i, j);
            if (rij <= 0.0) continue; // coincident points: subgradient zero
            double inv = gij / rij;
            Eigen::Index si = scale_by_row ? i : j;
            const double* zj = z.row(j).data();
            const double* sc = s.row(si).data();
            for (Eigen::Index k = 0; k < d; ++k) {
                double diff = zi[k] - zj[k];
                double w = sc[k] * sc[k] * diff;
                if (gz) {
                    (*gz)(i, k) += inv * w;
                    (*gz)(j, k) -= inv * w;
                }
                if (gs) (*gs)(si, k) += inv * sc[k] * diff * diff;
            }
        }
    }
}

Var pairwise_dist(Var z, Var s, bool scale_by_row) {
    check_same_shape(z, s, "pairwise_dist");
    Tape& t = *z.tape;
    int iz = z.id, is = s.id;
    return t.make(pairwise_forward(z.val(), s.val(), scale_by_row), {iz, is},
                  [iz, is, scale_by_row](Tape& t, int self) {
                      const MatRM& g = t.grad(self);
                      const MatRM& r = t.val(self);
                      const MatRM& z = t.val(iz);
                      const MatRM& s = t.val(is);
                      MatRM gz, gs;
                      bool wz = t.needs_grad(iz), ws = t.needs_grad(is);
                      if (wz) gz = MatRM::Zero(z.rows(), z.cols());
                      if (ws) gs = MatRM::Zero(s.rows(), s.cols());
                      pairwise_backward(g, r, z, s, scale_by_row, wz ? &gz : nullptr,
                                        ws ? &gs : nullptr);
                      if (wz) t.accum(iz, gz);
                      if (ws) t.accum(is, gs);
                  });
}

Var pair_dist(Var z, Var s, PairList pairs, bool scale_by_row) {
    check_same_shape(z, s, "pair_dist");
    Tape& t = *z.tape;
    int iz = z.id, is = s.id;
    const MatRM& zv = z.val();
    const MatRM& sv = s.val();
    const Eigen::Index d = zv.cols();
    MatRM out(static_cast<Eigen::Index>(pairs->size()), 1);
    for (size_t k = 0; k < pairs->size(); ++k) {
        auto [i, j] = (*pairs)[k];
        const double* sc = scale_by_row ? sv.row(i).data() : sv.row(j).data();
        double acc = 0.0;
        for (Eigen::Index q = 0; q < d; ++q) {
            double w = sc[q] * (zv(i, q) - zv(j, q));
            acc += w * w;
        }
        out(static_cast<Eigen::Index>(k), 0) = std::sqrt(acc);
    }
    return t.make(std::move(out), {iz, is}, [iz, is, pairs, scale_by_row](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        const MatRM& r = t.val(self);
        const MatRM& z = t.val(iz);
        const MatRM& s = t.val(is);
        const Eigen::Index d = z.cols();
        bool wz = t.needs_grad(iz), ws = t.needs_grad(is);
        MatRM gz = MatRM::Zero(z.rows(), z.cols());
        MatRM gs = MatRM::Zero(s.rows(), s.cols());
        for (size_t k = 0; k < pairs->size(); ++k) {
            auto [i, j] = (*pairs)[k];
            double rk = r(static_cast<Eigen::Index>(k), 0);
            double gk = g(static_cast<Eigen::Index>(k), 0);
            if (gk == 0.0 || rk <= 0.0) continue;
            double inv = gk / rk;
            Eigen::Index si = scale_by_row ? i : j;
            for (Eigen::Index q = 0; q < d; ++q) {
                double diff = z(i, q) - z(j, q);
                double sc = s(si, q);
                double w = sc * sc * diff;
                if (wz) {
                    gz(i, q) += inv * w;
                    gz(j, q) -= inv * w;
                }
                if (ws) gs(si, q) += inv * sc * diff * diff;
            }
        }
        if (wz) t.accum(iz, gz);
        if (ws) t.accum(is, gs);
    });
}

} // namespace

Var pairwise_dist_rowscale(Var z, Var s) { return pairwise_dist(z, s, true); }
Var pairwise_dist_colscale(Var z, Var s) { return pairwise_dist(z, s, false); }
Var pair_dist_rowscale(Var z, Var s, PairList pairs) {
    return pair_dist(z, s, std::move(pairs), true);
}
Var pair_dist_colscale(Var z, Var s, PairList pairs) {
    return pair_dist(z, s, std::move(pairs), false);
}

Var pair_inner_product(Var u, Var v, PairList pairs) {
    check_same_shape(u, v, "pair_inner_product");
    Tape& t = *u.tape;
    int iu = u.id, iv = v.id;
    const MatRM& uv = u.val();
    const MatRM& vv = v.val();
    MatRM out(static_cast<Eigen::Index>(pairs->size()), 1);
    for (size_t k = 0; k < pairs->size(); ++k) {
        auto [i, j] = (*pairs)[k];
        out(static_cast<Eigen::Index>(k), 0) = uv.row(i).dot(vv.row(j));
    }
    return t.make(std::move(out), {iu, iv}, [iu, iv, pairs](Tape& t, int self) {
        const MatRM& g = t.grad(self);
        const MatRM& u = t.val(iu);
        const MatRM& v = t.val(iv);
        bool wu = t.needs_grad(iu), wv = t.needs_grad(iv);
        MatRM gu = MatRM::Zero(u.rows(), u.cols());
        MatRM gv = MatRM::Zero(v.rows(), v.cols());
        for (size_t k = 0; k < pairs->size(); ++k) {
            auto [i, j] = (*pairs)[k];
            double gk = g(static_cast<Eigen::Index>(k), 0);
            if (gk == 0.0) continue;
            if (wu) gu.row(i) += gk * v.row(j);
            if (wv) gv.row(j) += gk * u.row(i);
        }
        if (wu) t.accum(iu, gu);
        if (wv) t.accum(iv, gv);
    });
}

// ---------------------------------------------------------------------------
// reconstruction losses

Var bce_full(Var logits, const Csr* adj, double pos_weight) {
    Tape& t = *logits.tape;
    int il = logits.id;
    const MatRM& x = logits.val();
    const Eigen::Index n = x.rows();
    if (x.cols() != n || adj->rows != n) throw NumericError("bce_full: shape mismatch");

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int64_t k = adj->row_ptr[i];
        const int64_t kend = adj->row_ptr[i + 1];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            bool pos = false;
            while (k < kend && adj->col_idx[k] < j) ++k;
            if (k < kend && adj->col_idx[k] == j) pos = true;
            loss += pos ? pos_weight * stable_softplus(-x(i, j)) : stable_softplus(x(i, j));
        }
    }
    MatRM out(1, 1);
    out(0, 0) = loss;
    return t.make(std::move(out), {il}, [il, adj, pos_weight](Tape& t, int self) {
        if (!t.needs_grad(il)) return;
        double g = t.grad(self)(0, 0);
        const MatRM& x = t.val(il);
        const Eigen::Index n = x.rows();
        MatRM gx(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            int64_t k = adj->row_ptr[i];
            const int64_t kend = adj->row_ptr[i + 1];
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) {
                    gx(i, j) = 0.0;
                    continue;
                }
                bool pos = false;
                while (k < kend && adj->col_idx[k] < j) ++k;
                if (k < kend && adj->col_idx[k] == j) pos = true;
                double sig = sigmoid_d(x(i, j));
                gx(i, j) = g * (pos ? pos_weight * (sig - 1.0) : sig);
            }
        }
        t.accum(il, gx);
    });
}

Var bce_pairs(Var pos_logits, Var neg_logits, double pos_weight, double neg_scale) {
    Tape& t = *pos_logits.tape;
    int ip = pos_logits.id, in = neg_logits.id;
    double loss = 0.0;
    for (Eigen::Index k = 0; k < pos_logits.val().size(); ++k)
        loss += pos_weight * stable_softplus(-pos_logits.val().data()[k]);
    for (Eigen::Index k = 0; k < neg_logits.val().size(); ++k)
        loss += neg_scale * stable_softplus(neg_logits.val().data()[k]);
    MatRM out(1, 1);
    out(0, 0) = loss;
    return t.make(std::move(out), {ip, in}, [ip, in, pos_weight, neg_scale](Tape& t, int self) {
        double g = t.grad(self)(0, 0);
        if (t.needs_grad(ip)) {
            const MatRM& xp = t.val(ip);
            MatRM gp(xp.rows(), xp.cols());
            for (Eigen::Index k = 0; k < xp.size(); ++k)
                gp.data()[k] = g * pos_weight * (sigmoid_d(xp.data()[k]) - 1.0);
            t.accum(ip, gp);
        }
        if (t.needs_grad(in)) {
            const MatRM& xn = t.val(in);
            MatRM gn(xn.rows(), xn.cols());
            for (Eigen::Index k = 0; k < xn.size(); ++k)
                gn.data()[k] = g * neg_scale * sigmoid_d(xn.data()[k]);
            t.accum(in, gn);
        }
    });
}

} // namespace dlsm::ad

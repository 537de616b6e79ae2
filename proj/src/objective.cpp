#include "objective.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "errors.hpp"

namespace dlsm {

namespace {
inline double softplus_d(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
} // namespace

double kl_normal(const Eigen::VectorXd& mu_q, const Eigen::VectorXd& sigma_q,
                 const Eigen::VectorXd& mu_p, const Eigen::VectorXd& sigma_p) {
    if ((sigma_q.array() <= 0.0).any() || (sigma_p.array() <= 0.0).any())
        throw UsageError("kl_normal: standard deviations must be positive");
    double kl = 0.0;
    for (Eigen::Index k = 0; k < mu_q.size(); ++k) {
        double vq = sigma_q(k) * sigma_q(k), vp = sigma_p(k) * sigma_p(k);
        double dm = mu_q(k) - mu_p(k);
        kl += std::log(sigma_p(k) / sigma_q(k)) + (vq + dm * dm) / (2.0 * vp) - 0.5;
    }
    return kl;
}

namespace {
// log-density of the Binary Concrete at sample s with location logit `a` and
// temperature l, up to the terms that cancel in density ratios:
//   log p(s) = log l - log s - log(1-s) - softplus(t) - softplus(-t),
//   t = l logit(s) - a
double concrete_logpdf_core(double a, double l, double ls) {
    double tt = l * ls - a;
    return -softplus_d(tt) - softplus_d(-tt);
}
} // namespace

double kl_concrete(double logit_q, double logit_p, double temperature, double s) {
    if (!(temperature > 0.0)) throw UsageError("kl_concrete: temperature must be positive");
    s = std::min(std::max(s, 1e-7), 1.0 - 1e-7);
    double ls = std::log(s) - std::log1p(-s);
    return concrete_logpdf_core(logit_q, temperature, ls) -
           concrete_logpdf_core(logit_p, temperature, ls);
}

double kl_concrete(double logit_q, double logit_p, double temp_q, double temp_p, double s) {
    if (temp_q != temp_p)
        throw UsageError("kl_concrete: posterior and prior temperatures must match");
    return kl_concrete(logit_q, logit_p, temp_q, s);
}

double kl_dirichlet(const Eigen::VectorXd& alpha_q, const Eigen::VectorXd& alpha_p) {
    if (alpha_q.size() != alpha_p.size()) throw UsageError("kl_dirichlet: size mismatch");
    if ((alpha_q.array() <= 0.0).any() || (alpha_p.array() <= 0.0).any())
        throw UsageError("kl_dirichlet: shapes must be positive");
    double sq = alpha_q.sum(), sp = alpha_p.sum();
    double kl = std::lgamma(sq) - std::lgamma(sp);
    double psi_sq = boost::math::digamma(sq);
    for (Eigen::Index k = 0; k < alpha_q.size(); ++k) {
        kl += std::lgamma(alpha_p(k)) - std::lgamma(alpha_q(k));
        kl += (alpha_q(k) - alpha_p(k)) * (boost::math::digamma(alpha_q(k)) - psi_sq);
    }
    return kl;
}

double reconstruction_loss(const MatRM& probs, const Csr& adj, double pos_weight) {
    const Eigen::Index n = probs.rows();
    if (probs.cols() != n || adj.rows != n) throw UsageError("reconstruction_loss: shape mismatch");
    constexpr double eps = 1e-7;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int64_t k = adj.row_ptr[i];
        const int64_t kend = adj.row_ptr[i + 1];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            bool pos = false;
            while (k < kend && adj.col_idx[k] < j) ++k;
            if (k < kend && adj.col_idx[k] == j) pos = true;
            double p = std::min(std::max(probs(i, j), eps), 1.0 - eps);
            loss -= pos ? pos_weight * std::log(p) : std::log1p(-p);
        }
    }
    if (!std::isfinite(loss)) throw NumericError("reconstruction_loss: non-finite result");
    return loss;
}

ad::Var kl_normal_sum(ad::Var mu_q, ad::Var sigma_q, ad::Var mu_p, double sigma_p) {
    using namespace ad;
    if (!(sigma_p > 0.0)) throw UsageError("kl_normal_sum: prior sigma must be positive");
    double vp = sigma_p * sigma_p;
    Var var_q = square(sigma_q);
    Var dm2 = square(sub(mu_q, mu_p));
    Var term = add(scale(add(var_q, dm2), 1.0 / (2.0 * vp)),
                   std::log(sigma_p) - 0.5); // + (-log sigma_q) below
    return sum(sub(term, log_(sigma_q)));
}

ad::Var kl_concrete_sum(ad::Var sample, ad::Var logit_q, const Eigen::RowVectorXd& logit_p,
                        double temperature) {
    using namespace ad;
    Tape& t = *sample.tape;
    Var s = clamp(sample, 1e-7, 1.0 - 1e-7);
    Var ls = scale(logit(s), temperature);
    Var tq = sub(ls, logit_q);
    Var tp = sub_rowvec(ls, t.constant(MatRM(logit_p)));
    // -softplus(t) - softplus(-t), difference of q and p parts
    Var lq = add(softplus(tq), softplus(scale(tq, -1.0)));
    Var lp = add(softplus(tp), softplus(scale(tp, -1.0)));
    return sum(sub(lp, lq));
}

ad::Var kl_dirichlet_sum(ad::Var alpha_q, ad::Var alpha_p) {
    using namespace ad;
    if ((alpha_q.val().array() <= 0.0).any() || (alpha_p.val().array() <= 0.0).any())
        throw NumericError("kl_dirichlet_sum: non-positive Dirichlet shape");
    Var sum_q = colsum(alpha_q); // 1 x G
    Var sum_p = colsum(alpha_p);
    Var head = sum(sub(lgamma_(sum_q), lgamma_(sum_p)));
    Var body = sum(sub(lgamma_(alpha_p), lgamma_(alpha_q)));
    Var centered = sub_rowvec(digamma_(alpha_q), digamma_(sum_q));
    Var cross = sum(mul(sub(alpha_q, alpha_p), centered));
    return add(add(head, body), cross);
}

} // namespace dlsm

#include "samplers.hpp"

#include <cmath>

#include "errors.hpp"

namespace dlsm {

Eigen::RowVectorXd stick_breaking_logits(double v, int count) {
    if (!(v > 0.0 && v < 1.0)) throw UsageError("stick parameter must lie in (0,1)");
    if (count < 1) throw UsageError("stick_breaking_logits: count must be positive");
    Eigen::RowVectorXd out(count);
    double log_v = std::log(v);
    for (int g = 1; g <= count; ++g) {
        // logit(v^g) = g log v - log(1 - v^g)
        double vg = std::exp(g * log_v);
        double l = g * log_v - std::log1p(-vg);
        out(g - 1) = std::min(std::max(l, -kLogitClamp), kLogitClamp);
    }
    return out;
}

double sample_binary_concrete(double logit_location, double temperature, double u) {
    if (!(temperature > 0.0)) throw UsageError("concrete temperature must be positive");
    if (!(u > 0.0 && u < 1.0)) {
        // degenerate noise is clamped away from the boundary
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    }
    double lu = std::log(u) - std::log1p(-u);
    lu = std::min(std::max(lu, -kLogitClamp), kLogitClamp);
    double t = (logit_location + lu) / temperature;
    return 1.0 / (1.0 + std::exp(-t));
}

Eigen::VectorXd sample_normal_positions(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                                        const Eigen::VectorXd& eps) {
    if (mu.size() != sigma.size() || mu.size() != eps.size())
        throw UsageError("sample_normal_positions: size mismatch");
    if ((sigma.array() < 0.0).any()) throw UsageError("sample_normal_positions: negative sigma");
    return mu + sigma.cwiseProduct(eps);
}

MatRM sample_dirichlet_factors(const MatRM& shapes, RngStream& noise, int64_t node_count) {
    if ((shapes.array() <= 0.0).any())
        throw UsageError("sample_dirichlet_factors: shapes must be positive");
    MatRM g(shapes.rows(), shapes.cols());
    for (Eigen::Index i = 0; i < shapes.rows(); ++i)
        for (Eigen::Index j = 0; j < shapes.cols(); ++j) g(i, j) = noise.gamma(shapes(i, j));
    Eigen::RowVectorXd csum = g.colwise().sum();
    return static_cast<double>(node_count) * (g.array().rowwise() / csum.array());
}

MatRM dirichlet_factor_means(const MatRM& shapes, int64_t node_count) {
    if ((shapes.array() <= 0.0).any())
        throw UsageError("dirichlet_factor_means: shapes must be positive");
    Eigen::RowVectorXd csum = shapes.colwise().sum();
    return static_cast<double>(node_count) * (shapes.array().rowwise() / csum.array());
}

ad::Var concrete_sample(ad::Var logits, const MatRM& uniform_noise, double temperature) {
    if (!(temperature > 0.0)) throw UsageError("concrete temperature must be positive");
    ad::Tape& t = *logits.tape;
    MatRM noise_logits(uniform_noise.rows(), uniform_noise.cols());
    for (Eigen::Index k = 0; k < uniform_noise.size(); ++k) {
        double u = uniform_noise.data()[k];
        double lu = std::log(u) - std::log1p(-u);
        noise_logits.data()[k] = std::min(std::max(lu, -kLogitClamp), kLogitClamp);
    }
    ad::Var shifted = ad::add(logits, t.constant(std::move(noise_logits)));
    return ad::sigmoid(ad::scale(shifted, 1.0 / temperature));
}

ad::Var normal_sample(ad::Var mu, ad::Var sigma, const MatRM& std_noise) {
    ad::Tape& t = *mu.tape;
    return ad::add(mu, ad::mul(sigma, t.constant(std_noise)));
}

ad::Var dirichlet_factor_sample(ad::Var shapes, uint64_t stream_seed, int64_t node_count) {
    ad::Var raw = ad::gamma_sample(shapes, stream_seed);
    return ad::colnorm_scale(raw, static_cast<double>(node_count));
}

} // namespace dlsm

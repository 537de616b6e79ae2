#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tape.hpp"

namespace dlsm {

struct LossBreakdown {
    double kl_positions = 0.0;   // z
    double kl_memberships = 0.0; // s
    double kl_activity = 0.0;    // gamma
    double kl_popularity = 0.0;  // delta
    double recon = 0.0;
    double total = 0.0;
};

// Closed-form KL( N(mu_q, sigma_q^2) || N(mu_p, sigma_p^2) ), summed over
// dimensions. Parameters are elementwise standard deviations.
double kl_normal(const Eigen::VectorXd& mu_q, const Eigen::VectorXd& sigma_q,
                 const Eigen::VectorXd& mu_p, const Eigen::VectorXd& sigma_p);

// Single-sample estimate of KL between two Binary Concrete densities at the
// same temperature, evaluated at sample s.
double kl_concrete(double logit_q, double logit_p, double temperature, double s);
// Overload guarding the matched-temperature contract.
double kl_concrete(double logit_q, double logit_p, double temp_q, double temp_p, double s);

// Closed-form KL( Dirichlet(alpha_q) || Dirichlet(alpha_p) ).
double kl_dirichlet(const Eigen::VectorXd& alpha_q, const Eigen::VectorXd& alpha_p);

// -sum_{i!=j} [ w a_ij log P_ij + (1 - a_ij) log(1 - P_ij) ]; probabilities
// clamped into (eps, 1-eps) before the logs.
double reconstruction_loss(const MatRM& probs, const Csr& adj, double pos_weight);

// Tape-level assemblies used by the training pass ---------------------------

// Diagonal-Normal KL with a shared scalar prior sigma; summed to a scalar.
ad::Var kl_normal_sum(ad::Var mu_q, ad::Var sigma_q, ad::Var mu_p, double sigma_p);
// Binary Concrete KL estimator at matched temperature; prior logits constant.
ad::Var kl_concrete_sum(ad::Var sample, ad::Var logit_q, const Eigen::RowVectorXd& logit_p,
                        double temperature);
// Column-wise Dirichlet KL: each column of the n x G shape matrices is one
// Dirichlet over the node axis. Summed over columns.
ad::Var kl_dirichlet_sum(ad::Var alpha_q, ad::Var alpha_p);

} // namespace dlsm

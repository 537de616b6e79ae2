#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "tape.hpp"

namespace dlsm {

constexpr double kLogitClamp = 15.0;

// pi_g = logit(v^g) for g = 1..count; strictly decreasing, clamped to +-15.
Eigen::RowVectorXd stick_breaking_logits(double v, int count);

// s = sigmoid((logit_location + logit(u)) / temperature)
double sample_binary_concrete(double logit_location, double temperature, double u);

// z = mu + sigma . eps
Eigen::VectorXd sample_normal_positions(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                                        const Eigen::VectorXd& eps);

// Draws one Gamma(alpha_k, 1) per component, normalizes across the node axis
// (rows) and magnifies by node_count, so each column sums to node_count.
// shapes: n x G. Returns the factors; strictly positive.
MatRM sample_dirichlet_factors(const MatRM& shapes, RngStream& noise, int64_t node_count);

// Deterministic view of the factors at evaluation time: normalized Gamma-shape
// means, scaled by the node count.
MatRM dirichlet_factor_means(const MatRM& shapes, int64_t node_count);

// Tape-level samplers used by the training pass ----------------------------

// Binary Concrete sample from posterior logits and fixed uniform noise; the
// noise logits are pre-clamped to +-15 to guard u near 0 or 1.
ad::Var concrete_sample(ad::Var logits, const MatRM& uniform_noise, double temperature);

// Normal reparameterization with fixed standard-normal noise.
ad::Var normal_sample(ad::Var mu, ad::Var sigma, const MatRM& std_noise);

// Dirichlet factors: pathwise Gamma draws, column normalization, scale by n.
ad::Var dirichlet_factor_sample(ad::Var shapes, uint64_t stream_seed, int64_t node_count);

} // namespace dlsm

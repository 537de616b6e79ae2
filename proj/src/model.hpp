#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "config.hpp"
#include "graph.hpp"
#include "objective.hpp"
#include "params.hpp"
#include "samplers.hpp"
#include "split.hpp"
#include "tape.hpp"

namespace dlsm {

// Edge probability heads on plain vectors; the training pass uses the fused
// tape kernels, these are the reference forms.
double edge_probability_distance(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_j,
                                 const Eigen::VectorXd& activity_i,
                                 const Eigen::VectorXd& popularity_j, double beta0,
                                 double beta_out, double beta_in);
double edge_probability_inner_product(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_j,
                                      const Eigen::VectorXd& activity_i,
                                      const Eigen::VectorXd& popularity_j, double beta_out,
                                      double beta_in);

// Column-stochastic readout: y = x * softmax_cols(u); preserves positivity.
MatRM output_transform(const MatRM& x, const MatRM& column_stochastic_w);

// Per-layer posterior state at evaluation time (posterior means).
struct LayerPosterior {
    MatRM mu, sigma, membership_logits, activity_shape, popularity_shape;
    MatRM membership_hard; // sigmoid(logits) thresholded at 0.5
    MatRM z_mean, activity_mean, popularity_mean;
};

struct MeanLatents {
    std::vector<LayerPosterior> layers;
    MatRM positions;  // n x D
    MatRM activity;   // n x D, strictly positive
    MatRM popularity; // n x D (== activity when undirected)
};

// The hierarchical model: directed GCN encoder feeding a stochastic
// latent-space decoder, trained by reparameterized gradients.
class Model {
public:
    Model(const DirectedGraph& graph, std::vector<Edge> train_edges, const ModelConfig& cfg);

    struct Forward {
        ad::Var total;
        LossBreakdown breakdown;
        std::vector<int> param_leaf_ids; // aligned with the store order
    };

    // One stochastic training pass on a fresh tape. kl_scale multiplies every
    // KL term (warm-up); temperature is the Concrete relaxation temperature.
    Forward training_pass(ad::Tape& tape, uint64_t noise_seed, double kl_scale,
                          double temperature) const;

    // Deterministic forward on posterior means; no sampling.
    MeanLatents mean_pass() const;

    // Probabilities for explicit pairs from posterior means. Rejects self loops.
    Eigen::VectorXd score_edges(const MeanLatents& latents,
                                const std::vector<Edge>& pairs) const;

    // Full n x n probability matrix from posterior means; diagonal forced to 0.
    MatRM reconstruct(const MeanLatents& latents) const;

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const ModelConfig& config() const { return cfg_; }
    const std::vector<Edge>& train_edges() const { return train_edges_; }
    const Csr& normalized_adjacency() const { return adj_norm_; }
    int32_t node_count() const { return n_; }
    double beta0() const { return params_.value("beta0")(0, 0); }
    double beta_out() const { return params_.value("beta_out")(0, 0); }
    double beta_in() const {
        return cfg_.undirected ? beta_out() : params_.value("beta_in")(0, 0);
    }
    double effective_pos_weight() const { return pos_weight_; }

    const std::vector<std::string>& id_map() const { return id_map_; }

private:
    int32_t n_ = 0;
    std::vector<Edge> train_edges_;
    std::vector<std::string> id_map_;
    std::optional<MatRM> attributes_;
    ModelConfig cfg_;
    Csr adj_norm_, adj_norm_t_; // normalized train adjacency and its transpose
    Csr adj_train_;             // binary train adjacency (reconstruction target)
    ParamStore params_;
    double pos_weight_ = 1.0;
    int layers_ = 0; // stochastic decoder layers

    void init_params();
    // encoder hidden states; dropout masks drawn from noise_seed when enabled
    std::vector<ad::Var> encode_on_tape(ad::Tape& tape, const std::vector<int>& leaf_ids,
                                        uint64_t noise_seed) const;
    std::vector<MatRM> encode_plain() const;
};

} // namespace dlsm

#include "model.hpp"

#include <cmath>
#include <unordered_set>

#include "encoder.hpp"
#include "errors.hpp"

namespace dlsm {

namespace {

constexpr double kSigmaFloor = 1e-6;
constexpr double kShapeFloor = 1e-4;

inline double softplus_d(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// softplus(x) = target at init keeps posteriors pinned near their priors
inline double softplus_inverse(double y) { return std::log(std::expm1(y)); }

MatRM glorot(Eigen::Index rows, Eigen::Index cols, RngStream& rs) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    MatRM m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = (2.0 * rs.uniform() - 1.0) * limit;
    return m;
}

MatRM softmax_cols_plain(const MatRM& u) {
    MatRM y = u;
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        double mx = y.col(c).maxCoeff();
        y.col(c) = (y.col(c).array() - mx).exp();
        y.col(c) /= y.col(c).sum();
    }
    return y;
}

void leaky_inplace(MatRM& m, double slope) {
    for (Eigen::Index k = 0; k < m.size(); ++k)
        if (m.data()[k] < 0.0) m.data()[k] *= slope;
}

uint64_t pair_key64(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

} // namespace

double edge_probability_distance(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_j,
                                 const Eigen::VectorXd& activity_i,
                                 const Eigen::VectorXd& popularity_j, double beta0,
                                 double beta_out, double beta_in) {
    Eigen::VectorXd diff = z_i - z_j;
    double r = activity_i.cwiseProduct(diff).norm();
    double q = popularity_j.cwiseProduct(diff).norm();
    return sigmoid_d(beta0 - beta_out * r - beta_in * q);
}

double edge_probability_inner_product(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_j,
                                      const Eigen::VectorXd& activity_i,
                                      const Eigen::VectorXd& popularity_j, double beta_out,
                                      double beta_in) {
    double dot = (activity_i.cwiseProduct(z_i)).dot(popularity_j.cwiseProduct(z_j));
    return sigmoid_d(beta_out * beta_in * dot);
}

MatRM output_transform(const MatRM& x, const MatRM& column_stochastic_w) {
    for (Eigen::Index c = 0; c < column_stochastic_w.cols(); ++c) {
        if (std::abs(column_stochastic_w.col(c).sum() - 1.0) > 1e-6)
            throw NumericError("output_transform: column " + std::to_string(c) +
                               " does not sum to 1");
    }
    return x * column_stochastic_w;
}

Model::Model(const DirectedGraph& graph, std::vector<Edge> train_edges, const ModelConfig& cfg)
    : n_(graph.n), train_edges_(std::move(train_edges)), id_map_(graph.id_map), cfg_(cfg) {
    if (graph.attributes) attributes_ = MatRM(*graph.attributes);
    cfg_.validate();
    if (train_edges_.empty()) throw UsageError("model requires a non-empty training edge set");
    std::sort(train_edges_.begin(), train_edges_.end());
    train_edges_.erase(std::unique(train_edges_.begin(), train_edges_.end()), train_edges_.end());
    for (const auto& [s, t] : train_edges_)
        if (s < 0 || s >= n_ || t < 0 || t >= n_ || s == t)
            throw UsageError("model: invalid training edge");

    layers_ = static_cast<int>(cfg_.decoder_sizes.size());
    adj_norm_ = normalize_adjacency(n_, train_edges_);
    adj_norm_t_ = adj_norm_.transposed();
    adj_train_ = Csr::from_edges(n_, train_edges_);

    double m = static_cast<double>(train_edges_.size());
    double total = static_cast<double>(n_) * (static_cast<double>(n_) - 1.0);
    pos_weight_ = cfg_.pos_weight > 0.0 ? cfg_.pos_weight : (total - m) / m;

    init_params();
}

void Model::init_params() {
    const auto& K = cfg_.encoder_sizes;
    const auto& G = cfg_.decoder_sizes;
    const bool directed = !cfg_.undirected;
    const Eigen::Index p = attributes_ ? attributes_->cols() : n_;

    auto add_glorot = [&](const std::string& name, Eigen::Index r, Eigen::Index c) {
        RngStream rs = substream(cfg_.seed, "init/" + name);
        params_.add(name, glorot(r, c, rs));
    };
    auto add_bias = [&](const std::string& name, Eigen::Index c, double value) {
        params_.add(name, MatRM::Constant(1, c, value));
    };

    Eigen::Index in = p;
    for (size_t l = 0; l < K.size(); ++l) {
        add_glorot("enc_w" + std::to_string(l + 1), in, K[l]);
        in = K[l];
    }

    const double shape_bias = softplus_inverse(1.0);
    for (int l = 1; l <= layers_; ++l) {
        Eigen::Index g = G[l - 1];
        Eigen::Index base;
        if (l == 1) {
            base = K.front() + (K.size() > 1 ? K.back() : 0);
        } else {
            add_glorot("dec" + std::to_string(l) + "_prop_z", G[l - 2], g);
            add_glorot("dec" + std::to_string(l) + "_prop_act", G[l - 2], g);
            if (directed) add_glorot("dec" + std::to_string(l) + "_prop_pop", G[l - 2], g);
            base = K[l - 1] + g * (directed ? 3 : 2) + G[l - 2];
        }
        std::string pre = "dec" + std::to_string(l) + "_";
        add_glorot(pre + "mu_w", base, g);
        add_bias(pre + "mu_b", g, 0.0);
        add_glorot(pre + "sigma_w", base, g);
        add_bias(pre + "sigma_b", g, shape_bias); // softplus -> 1.0, matching the unit prior
        add_glorot(pre + "member_w", base, g);
        add_bias(pre + "member_b", g, 0.0);
        add_glorot(pre + "act_w", base, g);
        add_bias(pre + "act_b", g, shape_bias);
        if (directed) {
            add_glorot(pre + "pop_w", base, g);
            add_bias(pre + "pop_b", g, shape_bias);
        }
    }

    add_glorot("readout_w", G.back(), cfg_.latent_dim);
    params_.add("beta0", MatRM::Zero(1, 1));
    params_.add("beta_out", MatRM::Constant(1, 1, 1.0));
    if (directed) params_.add("beta_in", MatRM::Constant(1, 1, 1.0));
}

std::vector<ad::Var> Model::encode_on_tape(ad::Tape& tape, const std::vector<int>& leaf_ids,
                                           uint64_t noise_seed) const {
    using namespace ad;
    auto pvar = [&](const std::string& name) {
        return Var{&tape, leaf_ids[params_.index_of(name)]};
    };
    std::vector<Var> hidden;
    Var h;
    for (size_t l = 0; l < cfg_.encoder_sizes.size(); ++l) {
        Var w = pvar("enc_w" + std::to_string(l + 1));
        if (l == 0) {
            Var hw = attributes_ ? matmul(tape.constant(*attributes_), w) : w;
            h = spmm(&adj_norm_, &adj_norm_t_, hw);
        } else {
            h = spmm(&adj_norm_, &adj_norm_t_, matmul(h, w));
        }
        h = leaky_relu(h, cfg_.leaky_relu_slope);
        if (cfg_.dropout > 0.0) {
            // inverted dropout with a fixed per-epoch mask
            RngStream rs = substream(noise_seed, {3000 + static_cast<uint64_t>(l)});
            double keep = 1.0 - cfg_.dropout;
            MatRM mask(h.rows(), h.cols());
            for (Eigen::Index k = 0; k < mask.size(); ++k)
                mask.data()[k] = rs.uniform() < keep ? 1.0 / keep : 0.0;
            h = mul(h, tape.constant(std::move(mask)));
        }
        hidden.push_back(h);
    }
    return hidden;
}

std::vector<MatRM> Model::encode_plain() const {
    EncoderStack stack;
    stack.leaky_slope = cfg_.leaky_relu_slope;
    for (size_t l = 0; l < cfg_.encoder_sizes.size(); ++l)
        stack.weights.push_back(params_.value("enc_w" + std::to_string(l + 1)));
    std::optional<MatRM> attrs = attributes_;
    return encode(adj_norm_, attrs, stack);
}

Model::Forward Model::training_pass(ad::Tape& tape, uint64_t noise_seed, double kl_scale,
                                    double temperature) const {
    using namespace ad;
    const bool directed = !cfg_.undirected;
    const auto& G = cfg_.decoder_sizes;

    std::vector<int> leaf_ids(params_.count());
    for (size_t i = 0; i < params_.count(); ++i)
        leaf_ids[i] = tape.leaf(params_.value(static_cast<int>(i)), true).id;
    auto pvar = [&](const std::string& name) {
        return Var{&tape, leaf_ids[params_.index_of(name)]};
    };

    std::vector<Var> hidden = encode_on_tape(tape, leaf_ids, noise_seed);

    Var kl_z = tape.constant(0.0), kl_s = tape.constant(0.0);
    Var kl_act = tape.constant(0.0), kl_pop = tape.constant(0.0);
    Var prev_z, prev_act, prev_pop, prev_s;

    auto draw_noise = [&](uint64_t kind, int layer, Eigen::Index g) {
        RngStream rs = substream(noise_seed, {kind, static_cast<uint64_t>(layer)});
        MatRM m(n_, g);
        if (kind == 1)
            for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rs.normal();
        else
            for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rs.uniform();
        return m;
    };

    auto check_term = [&](Var v, const char* term, int layer) {
        if (!std::isfinite(scalar(v)))
            throw NumericError(std::string("non-finite ") + term + " at decoder layer " +
                               std::to_string(layer));
        return v;
    };

    for (int l = 1; l <= layers_; ++l) {
        const Eigen::Index g = G[l - 1];
        const std::string pre = "dec" + std::to_string(l) + "_";

        Var base, m_z, m_act, m_pop;
        if (l == 1) {
            base = hidden.size() > 1 ? concat_cols({hidden.front(), hidden.back()})
                                     : hidden.front();
        } else {
            m_z = leaky_relu(matmul(prev_z, pvar(pre + "prop_z")), cfg_.leaky_relu_slope);
            // factor chains feed Dirichlet shape increments, which must stay
            // positive: softplus, not leaky ReLU
            m_act = softplus(matmul(prev_act, pvar(pre + "prop_act")));
            std::vector<Var> parts = {hidden[l - 1], m_z, m_act};
            if (directed) {
                m_pop = softplus(matmul(prev_pop, pvar(pre + "prop_pop")));
                parts.push_back(m_pop);
            }
            parts.push_back(prev_s);
            base = concat_cols(parts);
        }

        Var mu = add_rowvec(matmul(base, pvar(pre + "mu_w")), pvar(pre + "mu_b"));
        Var sigma =
            add(softplus(add_rowvec(matmul(base, pvar(pre + "sigma_w")), pvar(pre + "sigma_b"))),
                kSigmaFloor);
        Eigen::RowVectorXd sb = stick_breaking_logits(cfg_.stick_v, static_cast<int>(g));
        // posterior logits clamped like every other logit in the model; keeps
        // the Concrete KL estimator bounded when the sample saturates
        Var member_logits = clamp(
            add_rowvec(add_rowvec(matmul(base, pvar(pre + "member_w")), pvar(pre + "member_b")),
                       tape.constant(MatRM(sb))),
            -kLogitClamp, kLogitClamp);
        Var act_shape =
            add(softplus(add_rowvec(matmul(base, pvar(pre + "act_w")), pvar(pre + "act_b"))),
                kShapeFloor);
        Var pop_shape;
        if (directed)
            pop_shape =
                add(softplus(add_rowvec(matmul(base, pvar(pre + "pop_w")), pvar(pre + "pop_b"))),
                    kShapeFloor);

        // sampling; the membership gate sparsifies every latent, so positions
        // and factors live on the dimensions of the node's communities
        Var s = concrete_sample(member_logits, draw_noise(2, l, g), temperature);
        Var z = mul(s, normal_sample(mu, sigma, draw_noise(1, l, g)));
        Var act =
            mul(s, dirichlet_factor_sample(act_shape, hash_combine(noise_seed, 1000 + l), n_));
        Var pop;
        if (directed)
            pop = mul(s,
                      dirichlet_factor_sample(pop_shape, hash_combine(noise_seed, 2000 + l), n_));

        Var prior_mean_z =
            l == 1 ? tape.constant(MatRM(MatRM::Zero(n_, g))) : mul(s, m_z);
        Var prior_act_shape =
            l == 1 ? tape.constant(MatRM(MatRM::Constant(n_, g, cfg_.prior_activity_shape)))
                   : add(mul(s, m_act), cfg_.prior_activity_shape);

        kl_z = add(kl_z, check_term(kl_normal_sum(mu, sigma, prior_mean_z,
                                                  std::sqrt(cfg_.prior_sigma2)),
                                    "kl_z", l));
        kl_s = add(kl_s, check_term(kl_concrete_sum(s, member_logits, sb, temperature), "kl_s", l));
        kl_act = add(kl_act, check_term(kl_dirichlet_sum(act_shape, prior_act_shape), "kl_gamma", l));
        if (directed) {
            Var prior_pop_shape =
                l == 1 ? tape.constant(MatRM(MatRM::Constant(n_, g, cfg_.prior_popularity_shape)))
                       : add(mul(s, m_pop), cfg_.prior_popularity_shape);
            kl_pop =
                add(kl_pop, check_term(kl_dirichlet_sum(pop_shape, prior_pop_shape), "kl_delta", l));
        }

        prev_z = z;
        prev_act = act;
        prev_pop = directed ? pop : act;
        prev_s = s;
    }

    Var readout = softmax_cols(pvar("readout_w"));
    Var Z = matmul(prev_z, readout);
    Var ACT = matmul(prev_act, readout);
    Var POP = directed ? matmul(prev_pop, readout) : ACT;

    Var b0 = pvar("beta0");
    Var bout = pvar("beta_out");
    Var bin = directed ? pvar("beta_in") : bout;

    Var recon;
    const bool full = n_ <= cfg_.recon_subsample_threshold;
    if (full) {
        Var logits;
        if (cfg_.mode == ReconMode::Distance) {
            Var r = pairwise_dist_rowscale(Z, ACT);
            Var q = pairwise_dist_colscale(Z, POP);
            logits = add_scalarvar(scale(add(mul_scalarvar(r, bout), mul_scalarvar(q, bin)), -1.0),
                                   b0);
        } else {
            logits = mul_scalarvar(matmul_nt(mul(ACT, Z), mul(POP, Z)), mul(bout, bin));
        }
        recon = bce_full(logits, &adj_train_, pos_weight_);
    } else {
        auto pos = ad::PairList(&train_edges_, [](const std::vector<Edge>*) {});
        // fresh uniform negatives each pass, rejected against the training edges
        auto neg = std::make_shared<std::vector<Edge>>();
        const int64_t m = static_cast<int64_t>(train_edges_.size());
        const int64_t want = m * cfg_.neg_subsample_factor;
        std::unordered_set<uint64_t> pos_keys;
        pos_keys.reserve(train_edges_.size() * 2);
        for (const auto& [s, t] : train_edges_) pos_keys.insert(pair_key64(s, t));
        RngStream rs = substream(noise_seed, {5});
        neg->reserve(want);
        while (static_cast<int64_t>(neg->size()) < want) {
            auto i = static_cast<int32_t>(rs.below(static_cast<uint64_t>(n_)));
            auto j = static_cast<int32_t>(rs.below(static_cast<uint64_t>(n_)));
            if (i == j || pos_keys.count(pair_key64(i, j))) continue;
            neg->emplace_back(i, j);
        }
        double total_neg = static_cast<double>(n_) * (static_cast<double>(n_) - 1.0) -
                           static_cast<double>(m);
        double neg_scale = total_neg / static_cast<double>(want);

        auto logits_for = [&](ad::PairList pairs) {
            if (cfg_.mode == ReconMode::Distance) {
                Var r = pair_dist_rowscale(Z, ACT, pairs);
                Var q = pair_dist_colscale(Z, POP, pairs);
                return add_scalarvar(
                    scale(add(mul_scalarvar(r, bout), mul_scalarvar(q, bin)), -1.0), b0);
            }
            return mul_scalarvar(pair_inner_product(mul(ACT, Z), mul(POP, Z), pairs),
                                 mul(bout, bin));
        };
        recon = bce_pairs(logits_for(pos), logits_for(neg), pos_weight_, neg_scale);
    }
    if (!std::isfinite(scalar(recon))) throw NumericError("non-finite reconstruction term");

    Var kl_all = add(add(kl_z, kl_s), add(kl_act, kl_pop));
    Var total = add(scale(kl_all, kl_scale), recon);

    Forward f;
    f.total = total;
    f.param_leaf_ids = std::move(leaf_ids);
    f.breakdown.kl_positions = kl_scale * scalar(kl_z);
    f.breakdown.kl_memberships = kl_scale * scalar(kl_s);
    f.breakdown.kl_activity = kl_scale * scalar(kl_act);
    f.breakdown.kl_popularity = kl_scale * scalar(kl_pop);
    f.breakdown.recon = scalar(recon);
    f.breakdown.total = scalar(total);
    if (!std::isfinite(f.breakdown.total)) throw NumericError("non-finite total loss");
    return f;
}

MeanLatents Model::mean_pass() const {
    const bool directed = !cfg_.undirected;
    const auto& G = cfg_.decoder_sizes;
    std::vector<MatRM> hidden = encode_plain();

    MeanLatents out;
    MatRM prev_z, prev_act, prev_pop, prev_s;
    for (int l = 1; l <= layers_; ++l) {
        const Eigen::Index g = G[l - 1];
        const std::string pre = "dec" + std::to_string(l) + "_";

        MatRM base, m_z, m_act, m_pop;
        if (l == 1) {
            if (hidden.size() > 1) {
                base.resize(n_, hidden.front().cols() + hidden.back().cols());
                base << hidden.front(), hidden.back();
            } else {
                base = hidden.front();
            }
        } else {
            m_z = prev_z * params_.value(pre + "prop_z");
            leaky_inplace(m_z, cfg_.leaky_relu_slope);
            m_act = prev_act * params_.value(pre + "prop_act");
            for (Eigen::Index k = 0; k < m_act.size(); ++k)
                m_act.data()[k] = softplus_d(m_act.data()[k]);
            Eigen::Index w = hidden[l - 1].cols() + m_z.cols() + m_act.cols() + prev_s.cols();
            if (directed) {
                m_pop = prev_pop * params_.value(pre + "prop_pop");
                for (Eigen::Index k = 0; k < m_pop.size(); ++k)
                    m_pop.data()[k] = softplus_d(m_pop.data()[k]);
                w += m_pop.cols();
            }
            base.resize(n_, w);
            if (directed)
                base << hidden[l - 1], m_z, m_act, m_pop, prev_s;
            else
                base << hidden[l - 1], m_z, m_act, prev_s;
        }

        LayerPosterior lp;
        lp.mu = base * params_.value(pre + "mu_w");
        lp.mu.rowwise() += params_.value(pre + "mu_b").row(0);
        lp.sigma = base * params_.value(pre + "sigma_w");
        lp.sigma.rowwise() += params_.value(pre + "sigma_b").row(0);
        for (Eigen::Index k = 0; k < lp.sigma.size(); ++k)
            lp.sigma.data()[k] = softplus_d(lp.sigma.data()[k]) + kSigmaFloor;

        Eigen::RowVectorXd sb = stick_breaking_logits(cfg_.stick_v, static_cast<int>(g));
        lp.membership_logits = base * params_.value(pre + "member_w");
        lp.membership_logits.rowwise() += params_.value(pre + "member_b").row(0);
        lp.membership_logits.rowwise() += sb;
        for (Eigen::Index k = 0; k < lp.membership_logits.size(); ++k)
            lp.membership_logits.data()[k] =
                std::min(std::max(lp.membership_logits.data()[k], -kLogitClamp), kLogitClamp);
        lp.membership_hard = MatRM(n_, g);
        for (Eigen::Index k = 0; k < lp.membership_logits.size(); ++k)
            lp.membership_hard.data()[k] =
                sigmoid_d(lp.membership_logits.data()[k]) >= 0.5 ? 1.0 : 0.0;

        lp.activity_shape = base * params_.value(pre + "act_w");
        lp.activity_shape.rowwise() += params_.value(pre + "act_b").row(0);
        for (Eigen::Index k = 0; k < lp.activity_shape.size(); ++k)
            lp.activity_shape.data()[k] = softplus_d(lp.activity_shape.data()[k]) + kShapeFloor;
        if (directed) {
            lp.popularity_shape = base * params_.value(pre + "pop_w");
            lp.popularity_shape.rowwise() += params_.value(pre + "pop_b").row(0);
            for (Eigen::Index k = 0; k < lp.popularity_shape.size(); ++k)
                lp.popularity_shape.data()[k] =
                    softplus_d(lp.popularity_shape.data()[k]) + kShapeFloor;
        }

        // posterior mean of the gated positions: E[s] . mu
        MatRM soft_gate(n_, g);
        for (Eigen::Index k = 0; k < soft_gate.size(); ++k)
            soft_gate.data()[k] = sigmoid_d(lp.membership_logits.data()[k]);
        lp.z_mean = soft_gate.cwiseProduct(lp.mu);
        lp.activity_mean = dirichlet_factor_means(lp.activity_shape, n_);
        lp.popularity_mean =
            directed ? dirichlet_factor_means(lp.popularity_shape, n_) : lp.activity_mean;

        prev_z = lp.z_mean;
        prev_act = lp.activity_mean;
        prev_pop = lp.popularity_mean;
        prev_s = lp.membership_hard;
        out.layers.push_back(std::move(lp));
    }

    MatRM readout = softmax_cols_plain(params_.value("readout_w"));
    out.positions = prev_z * readout;
    out.activity = prev_act * readout;
    out.popularity = directed ? MatRM(prev_pop * readout) : out.activity;
    return out;
}

Eigen::VectorXd Model::score_edges(const MeanLatents& latents,
                                   const std::vector<Edge>& pairs) const {
    const double b0 = beta0(), bout = beta_out(), bin = beta_in();
    Eigen::VectorXd scores(static_cast<Eigen::Index>(pairs.size()));
    for (size_t k = 0; k < pairs.size(); ++k) {
        auto [i, j] = pairs[k];
        if (i < 0 || i >= n_ || j < 0 || j >= n_)
            throw UsageError("score_edges: node index out of range");
        if (i == j) throw UsageError("score_edges: self-loop pair rejected");
        if (cfg_.mode == ReconMode::Distance) {
            scores(static_cast<Eigen::Index>(k)) = edge_probability_distance(
                latents.positions.row(i).transpose(), latents.positions.row(j).transpose(),
                latents.activity.row(i).transpose(), latents.popularity.row(j).transpose(), b0,
                bout, bin);
        } else {
            scores(static_cast<Eigen::Index>(k)) = edge_probability_inner_product(
                latents.positions.row(i).transpose(), latents.positions.row(j).transpose(),
                latents.activity.row(i).transpose(), latents.popularity.row(j).transpose(), bout,
                bin);
        }
    }
    return scores;
}

MatRM Model::reconstruct(const MeanLatents& latents) const {
    MatRM p = MatRM::Zero(n_, n_);
    const double b0 = beta0(), bout = beta_out(), bin = beta_in();
    for (int32_t i = 0; i < n_; ++i) {
        for (int32_t j = 0; j < n_; ++j) {
            if (i == j) continue;
            if (cfg_.mode == ReconMode::Distance) {
                p(i, j) = edge_probability_distance(
                    latents.positions.row(i).transpose(), latents.positions.row(j).transpose(),
                    latents.activity.row(i).transpose(), latents.popularity.row(j).transpose(), b0,
                    bout, bin);
            } else {
                p(i, j) = edge_probability_inner_product(
                    latents.positions.row(i).transpose(), latents.positions.row(j).transpose(),
                    latents.activity.row(i).transpose(), latents.popularity.row(j).transpose(),
                    bout, bin);
            }
        }
    }
    return p;
}

} // namespace dlsm

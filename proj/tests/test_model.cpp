#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "helpers.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace dlsm;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.encoder_sizes = {6, 4};
    cfg.decoder_sizes = {3, 5};
    cfg.latent_dim = 3;
    cfg.seed = 5;
    return cfg;
}

DirectedGraph ring_graph(int32_t n) {
    std::vector<Edge> edges;
    for (int32_t i = 0; i < n; ++i) {
        edges.emplace_back(i, (i + 1) % n);
        edges.emplace_back(i, (i + 3) % n);
    }
    return testutil::graph_from_edges(n, edges);
}

} // namespace

TEST_CASE("edge probability heads on pinned examples") {
    Eigen::VectorXd zi(2), zj(2), act(2), pop(2);
    zi << 1, 0;
    zj << 0, 1; // z_i - z_j = (1, -1)
    act << 0.5, 0.5;
    pop << 0.25, 0.75;

    // distance head
    double r = std::hypot(0.5, 0.5);          // 0.70711
    double q = std::hypot(0.25, 0.75);        // 0.79057
    double expect = 1.0 / (1.0 + std::exp(-(1.0 - r - q)));
    CHECK(edge_probability_distance(zi, zj, act, pop, 1.0, 1.0, 1.0) ==
          doctest::Approx(expect).epsilon(1e-9));
    CHECK(expect == doctest::Approx(0.3781).epsilon(1e-3));

    // zero distance and zero weights both give sigmoid(beta0)
    CHECK(edge_probability_distance(zi, zi, act, pop, 0.7, 1.0, 1.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-0.7))));
    CHECK(edge_probability_distance(zi, zj, act, pop, 0.7, 0.0, 0.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-0.7))));

    // inner-product head
    Eigen::VectorXd u(2), v(2), ones(2);
    ones << 1, 1;
    u << 1, 0;
    v << 2, 5;
    CHECK(edge_probability_inner_product(u, v, ones, ones, 1.0, 1.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-9));
    // orthogonal embeddings, and beta_out = 0, both give 1/2
    Eigen::VectorXd w(2);
    w << 0, 3;
    CHECK(edge_probability_inner_product(u, w, ones, ones, 1.0, 1.0) == doctest::Approx(0.5));
    CHECK(edge_probability_inner_product(u, v, ones, ones, 0.0, 1.0) == doctest::Approx(0.5));

    // asymmetry witness: p_ij pairs node i's activity with node j's
    // popularity, so swapping the direction swaps the factors used
    Eigen::VectorXd act_i(2), act_j(2), pop_i(2), pop_j(2);
    act_i << 2.0, 0.1;
    act_j << 0.3, 0.3;
    pop_i << 0.2, 0.8;
    pop_j << 1.5, 1.5;
    double pij = edge_probability_distance(zi, zj, act_i, pop_j, 0.5, 1.0, 2.0);
    double pji = edge_probability_distance(zj, zi, act_j, pop_i, 0.5, 1.0, 2.0);
    CHECK(std::abs(pij - pji) > 1e-3);
}

TEST_CASE("distance head is monotone in each coordinate gap") {
    Eigen::VectorXd zi(3), zj(3), act(3), pop(3);
    zi << 0.3, -0.2, 1.0;
    zj << -0.1, 0.4, 0.2;
    act << 0.8, 0.5, 1.2;
    pop << 0.3, 0.9, 0.4;
    double base = edge_probability_distance(zi, zj, act, pop, 0.4, 1.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd far = zi;
        far(k) += (zi(k) >= zj(k) ? 0.5 : -0.5); // widen the gap on axis k
        double p = edge_probability_distance(far, zj, act, pop, 0.4, 1.0, 1.0);
        CHECK(p < base);
    }
}

TEST_CASE("output transform: column stochasticity contract") {
    MatRM w(2, 2);
    w << 0.25, 0.9, 0.75, 0.1;
    MatRM x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    MatRM y = output_transform(x, w);
    CHECK(y.rows() == 3);

    // identity pass-through
    CHECK(output_transform(x, MatRM::Identity(2, 2)).isApprox(x));

    // all-ones input stays all-ones (convex combinations)
    MatRM ones = MatRM::Constant(3, 2, 1.0);
    CHECK(output_transform(ones, w).isApprox(ones));

    MatRM bad(2, 2);
    bad << 0.5, 0.9, 0.6, 0.1; // first column sums to 1.1
    CHECK_THROWS_AS(output_transform(x, bad), NumericError);
}

TEST_CASE("training pass: structural invariants of the latent chain") {
    DirectedGraph g = ring_graph(12);
    Model model(g, g.edges, small_config());

    ad::Tape tape;
    Model::Forward fwd = model.training_pass(tape, 7, 1.0, 0.5);
    CHECK(std::isfinite(fwd.breakdown.total));
    CHECK(fwd.breakdown.kl_positions >= 0.0);
    CHECK(fwd.breakdown.kl_activity >= -1e-9);
    CHECK(fwd.breakdown.kl_popularity >= -1e-9);

    // readout columns sum to one by construction
    MatRM readout = model.params().value("readout_w");
    MatRM soft = readout;
    for (Eigen::Index c = 0; c < soft.cols(); ++c) {
        double mx = soft.col(c).maxCoeff();
        soft.col(c) = (soft.col(c).array() - mx).exp();
        soft.col(c) /= soft.col(c).sum();
        CHECK(soft.col(c).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mean pass: positivity, shapes, determinism") {
    DirectedGraph g = ring_graph(10);
    ModelConfig cfg = small_config();
    Model model(g, g.edges, cfg);

    MeanLatents a = model.mean_pass();
    MeanLatents b = model.mean_pass();
    CHECK(a.positions == b.positions); // bit-for-bit deterministic

    CHECK(a.positions.rows() == 10);
    CHECK(a.positions.cols() == cfg.latent_dim);
    CHECK((a.activity.array() > 0.0).all());
    CHECK((a.popularity.array() > 0.0).all());
    REQUIRE(a.layers.size() == 2);
    CHECK(a.layers[0].mu.cols() == 3);
    CHECK(a.layers[1].mu.cols() == 5);
    CHECK((a.layers[0].sigma.array() > 0.0).all());

    // factor columns sum to n per latent dimension
    for (Eigen::Index c = 0; c < a.layers[0].activity_mean.cols(); ++c)
        CHECK(a.layers[0].activity_mean.col(c).sum() == doctest::Approx(10.0).epsilon(1e-9));

    // memberships are hard 0/1 views
    for (Eigen::Index k = 0; k < a.layers[0].membership_hard.size(); ++k) {
        double v = a.layers[0].membership_hard.data()[k];
        CHECK((v == 0.0 || v == 1.0));
    }
}

TEST_CASE("membership gating: zero membership nulls the prior contributions") {
    // the gate enters the priors as s . f(W x); verify the algebra directly
    RngStream rs(2);
    MatRM s = MatRM::Zero(4, 3);
    MatRM m(4, 3);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rs.normal();

    MatRM gated = s.cwiseProduct(m);
    CHECK(gated.isZero(0.0));

    // prior shape offsets survive: xi + 0 = xi
    MatRM prior = gated.array() + 1.7;
    CHECK((prior.array() == 1.7).all());

    // mixed gate: exactly the masked coordinates are zero
    s(1, 2) = 1.0;
    MatRM mixed = s.cwiseProduct(m);
    CHECK(mixed(1, 2) == doctest::Approx(m(1, 2)));
    CHECK(mixed(0, 0) == 0.0);
}

TEST_CASE("score_edges and reconstruct honour mode and undirected flag") {
    DirectedGraph g = ring_graph(8);

    SUBCASE("directed distance mode is generically asymmetric") {
        Model model(g, g.edges, small_config());
        MeanLatents latents = model.mean_pass();
        MatRM p = model.reconstruct(latents);
        CHECK(p.diagonal().isZero());
        CHECK((p.array() >= 0.0).all());
        CHECK((p.array() <= 1.0).all());
        double asym = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) asym = std::max(asym, std::abs(p(i, j) - p(j, i)));
        CHECK(asym > 1e-8);

        // scores match the matrix entries
        Eigen::VectorXd s = model.score_edges(latents, {{0, 1}, {5, 2}});
        CHECK(s(0) == doctest::Approx(p(0, 1)));
        CHECK(s(1) == doctest::Approx(p(5, 2)));

        CHECK_THROWS_AS(model.score_edges(latents, {{0, 0}}), UsageError);
        CHECK_THROWS_AS(model.score_edges(latents, {{0, 99}}), UsageError);
    }

    SUBCASE("undirected mode yields an exactly symmetric matrix") {
        ModelConfig cfg = small_config();
        cfg.undirected = true;
        Model model(g, g.edges, cfg);
        MeanLatents latents = model.mean_pass();
        CHECK(latents.activity == latents.popularity);
        MatRM p = model.reconstruct(latents);
        double asym = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) asym = std::max(asym, std::abs(p(i, j) - p(j, i)));
        CHECK(asym <= 1e-12);

        // no popularity-side parameters exist in undirected mode
        CHECK_FALSE(model.params().contains("beta_in"));
        CHECK_FALSE(model.params().contains("dec1_pop_w"));
        CHECK(model.beta_in() == model.beta_out());
    }

    SUBCASE("inner-product mode trains and scores") {
        ModelConfig cfg = small_config();
        cfg.mode = ReconMode::InnerProduct;
        Model model(g, g.edges, cfg);
        ad::Tape tape;
        Model::Forward fwd = model.training_pass(tape, 3, 1.0, 0.5);
        CHECK(std::isfinite(fwd.breakdown.total));
        MeanLatents latents = model.mean_pass();
        Eigen::VectorXd s = model.score_edges(latents, {{0, 1}});
        CHECK(s(0) > 0.0);
        CHECK(s(0) < 1.0);
    }
}

TEST_CASE("training pass with the pair-subsampled reconstruction estimator") {
    DirectedGraph g = ring_graph(20);
    ModelConfig cfg = small_config();
    cfg.recon_subsample_threshold = 10; // force the pair path on n=20
    cfg.neg_subsample_factor = 3;
    Model model(g, g.edges, cfg);

    ad::Tape tape;
    Model::Forward fwd = model.training_pass(tape, 11, 1.0, 0.5);
    CHECK(std::isfinite(fwd.breakdown.recon));
    tape.backward(fwd.total);

    // same seed, same estimate; different seed, different negatives
    ad::Tape t2, t3;
    double r2 = model.training_pass(t2, 11, 1.0, 0.5).breakdown.recon;
    double r3 = model.training_pass(t3, 12, 1.0, 0.5).breakdown.recon;
    CHECK(fwd.breakdown.recon == doctest::Approx(r2).epsilon(1e-15));
    CHECK(fwd.breakdown.recon != doctest::Approx(r3).epsilon(1e-12));
}

TEST_CASE("pair estimator: exact when enumerated, unbiased when sampled") {
    using namespace ad;
    const int n = 7, d = 3;
    RngStream rs(606);
    MatRM z(n, d), act(n, d), pop(n, d);
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        z.data()[k] = rs.normal();
        act.data()[k] = 0.2 + rs.uniform();
        pop.data()[k] = 0.2 + rs.uniform();
    }
    std::vector<Edge> pos = {{0, 1}, {1, 2}, {2, 3}, {3, 6}, {4, 5}, {6, 0}};
    std::sort(pos.begin(), pos.end());
    Csr adj = Csr::from_edges(n, pos);
    auto neg_all = std::make_shared<std::vector<Edge>>();
    for (int32_t i = 0; i < n; ++i)
        for (int32_t j = 0; j < n; ++j)
            if (i != j && !std::binary_search(pos.begin(), pos.end(), Edge{i, j}))
                neg_all->push_back({i, j});

    const double w = 4.2, b0 = 0.3;
    auto logits_pairs = [&](Tape& t, PairList pairs) {
        Var zz = t.leaf(z), aa = t.leaf(act), pp = t.leaf(pop);
        Var r = pair_dist_rowscale(zz, aa, pairs);
        Var q = pair_dist_colscale(zz, pp, pairs);
        return add(scale(add(r, q), -1.0), b0);
    };

    // full matrix route
    Tape t1;
    Var r1 = pairwise_dist_rowscale(t1.leaf(z), t1.leaf(act));
    Var q1 = pairwise_dist_colscale(t1.leaf(z), t1.leaf(pop));
    double full = scalar(bce_full(add(scale(add(r1, q1), -1.0), b0), &adj, w));

    // enumerated pair route equals it exactly
    Tape t2;
    auto pos_list = std::make_shared<std::vector<Edge>>(pos);
    double enumerated = scalar(
        bce_pairs(logits_pairs(t2, pos_list), logits_pairs(t2, neg_all), w, 1.0));
    CHECK(enumerated == doctest::Approx(full).epsilon(1e-12));

    // uniformly subsampled negatives, rescaled: unbiased across draws
    RngStream pick(99);
    const int draws = 3000, take = 8;
    double acc = 0.0;
    for (int it = 0; it < draws; ++it) {
        auto sub = std::make_shared<std::vector<Edge>>();
        for (int k = 0; k < take; ++k)
            sub->push_back((*neg_all)[pick.below(neg_all->size())]);
        Tape t3;
        double scale_neg = static_cast<double>(neg_all->size()) / take;
        acc += scalar(bce_pairs(logits_pairs(t3, pos_list), logits_pairs(t3, sub), w, scale_neg));
    }
    acc /= draws;
    CHECK(acc == doctest::Approx(full).epsilon(0.02));
}

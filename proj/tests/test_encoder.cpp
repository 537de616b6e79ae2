#include <doctest.h>

#include "encoder.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "rng.hpp"

using namespace dlsm;

TEST_CASE("normalized adjacency on pinned examples") {
    // single node, no edges: identity self-loop only
    Csr single = normalize_adjacency(1, {});
    CHECK(single.nnz() == 1);
    CHECK(single.at(0, 0) == doctest::Approx(1.0));

    // 2 nodes, edge (0,1): row sums (2,1), col sums (1,2)
    Csr two = normalize_adjacency(2, {{0, 1}});
    CHECK(two.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(two.at(0, 1) == doctest::Approx(0.5));
    CHECK(two.at(1, 0) == doctest::Approx(0.0));
    CHECK(two.at(1, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));

    // entries non-negative, sparsity pattern = A + I
    Csr n3 = normalize_adjacency(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(n3.nnz() == 6);
    for (double v : n3.values) CHECK(v > 0.0);
}

TEST_CASE("symmetrized graph reduces to the undirected GCN normalization") {
    std::vector<Edge> sym = {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}, {2, 0}};
    Csr a = normalize_adjacency(3, sym);
    // undirected normalization: 1/sqrt(d_i d_j) with degree 3 everywhere
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(a.at(i, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("gcn_layer identity and zero cases") {
    Csr eye = normalize_adjacency(3, {});
    MatRM h = MatRM::Identity(3, 3);
    MatRM w = MatRM::Identity(3, 3);
    // identity adjacency, identity weights: output = H (positive, so the
    // leaky activation is transparent)
    CHECK(gcn_layer(eye, h, w).isApprox(h));

    MatRM wz = MatRM::Zero(3, 2);
    CHECK(gcn_layer(eye, h, wz).isZero());

    // 2-node pinned example with H = I, W = I: output = leaky(A-hat)
    Csr two = normalize_adjacency(2, {{0, 1}});
    MatRM out = gcn_layer(two, MatRM::Identity(2, 2), MatRM::Identity(2, 2));
    CHECK(out(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(out(0, 1) == doctest::Approx(0.5));

    CHECK_THROWS_AS(gcn_layer(two, MatRM::Identity(2, 2), MatRM::Zero(3, 2)), NumericError);
}

TEST_CASE("encode: featureless input uses the identity trick") {
    auto g = testutil::graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    Csr adj = normalize_adjacency(g.n, g.edges);

    EncoderStack stack;
    stack.weights.push_back(MatRM::Identity(4, 4));
    std::optional<MatRM> none;
    auto hidden = encode(adj, none, stack);
    REQUIRE(hidden.size() == 1);
    // identity weights expose A-hat itself (all entries non-negative)
    CHECK(hidden[0].isApprox(adj.dense()));

    // with attributes, H0 = X
    std::optional<MatRM> x = MatRM::Constant(4, 2, 1.0);
    EncoderStack stack2;
    stack2.weights.push_back(MatRM::Identity(2, 2));
    auto h2 = encode(adj, x, stack2);
    CHECK(h2[0].rows() == 4);
    CHECK(h2[0].cols() == 2);
}

TEST_CASE("encode: permutation equivariance with permuted first-layer weights") {
    auto g = testutil::graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 4}});
    Csr adj = normalize_adjacency(g.n, g.edges);

    RngStream rs(31);
    MatRM w0(5, 3), w1(3, 2);
    for (Eigen::Index k = 0; k < w0.size(); ++k) w0.data()[k] = rs.normal();
    for (Eigen::Index k = 0; k < w1.size(); ++k) w1.data()[k] = rs.normal();

    EncoderStack stack;
    stack.weights = {w0, w1};
    std::optional<MatRM> none;
    auto h = encode(adj, none, stack);

    // permutation: rotate node ids by 2
    std::vector<int32_t> perm = {2, 3, 4, 0, 1}; // new id of old node i
    std::vector<Edge> pedges;
    for (auto [s, t] : g.edges) pedges.emplace_back(perm[s], perm[t]);
    auto pg = testutil::graph_from_edges(5, pedges);
    Csr padj = normalize_adjacency(pg.n, pg.edges);

    MatRM pw0(5, 3);
    for (int i = 0; i < 5; ++i) pw0.row(perm[i]) = w0.row(i);
    EncoderStack pstack;
    pstack.weights = {pw0, w1};
    auto ph = encode(padj, none, pstack);

    for (size_t l = 0; l < h.size(); ++l)
        for (int i = 0; i < 5; ++i)
            CHECK((ph[l].row(perm[i]) - h[l].row(i)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("encode locality: one linear layer only mixes rows in the A-hat pattern") {
    auto g = testutil::graph_from_edges(4, {{0, 1}, {2, 3}});
    Csr adj = normalize_adjacency(g.n, g.edges);

    // with slope 1.0 the activation is the identity
    EncoderStack stack;
    stack.leaky_slope = 1.0;
    MatRM w = MatRM::Identity(4, 4);
    stack.weights = {w};
    std::optional<MatRM> none;
    auto base = encode(adj, none, stack)[0];

    // perturbing node 3's weight row must not change rows without an edge to 3
    MatRM w2 = w;
    w2(3, 3) += 10.0;
    EncoderStack stack2;
    stack2.leaky_slope = 1.0;
    stack2.weights = {w2};
    auto shifted = encode(adj, none, stack2)[0];

    for (int i = 0; i < 4; ++i) {
        bool reachable = (i == 3) || adj.at(i, 3) != 0.0;
        bool changed = (shifted.row(i) - base.row(i)).cwiseAbs().maxCoeff() > 1e-12;
        CHECK(changed == reachable);
    }
}

TEST_CASE("encode rejects non-finite activations") {
    auto g = testutil::graph_from_edges(2, {{0, 1}});
    Csr adj = normalize_adjacency(g.n, g.edges);
    EncoderStack stack;
    stack.weights = {MatRM::Constant(2, 2, std::numeric_limits<double>::infinity())};
    std::optional<MatRM> none;
    CHECK_THROWS_AS(encode(adj, none, stack), NumericError);
}

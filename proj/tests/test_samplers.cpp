#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "rng.hpp"
#include "samplers.hpp"

using namespace dlsm;

TEST_CASE("stick-breaking logits: closed form, monotonicity, clamping") {
    Eigen::RowVectorXd pi = stick_breaking_logits(0.5, 3);
    CHECK(pi(0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(pi(1) == doctest::Approx(-1.0986122886681098));
    CHECK(pi(2) == doctest::Approx(-1.9459101090932196));

    // sigma(pi_1) = v for any v
    for (double v : {0.3, 0.5, 0.9}) {
        Eigen::RowVectorXd p = stick_breaking_logits(v, 6);
        CHECK(1.0 / (1.0 + std::exp(-p(0))) == doctest::Approx(v));
        for (int g = 1; g < 6; ++g) CHECK(p(g) < p(g - 1)); // strictly decreasing
    }

    // v near 1 clamps instead of overflowing
    Eigen::RowVectorXd near_one = stick_breaking_logits(1.0 - 1e-12, 2);
    CHECK(near_one(0) == doctest::Approx(kLogitClamp));

    CHECK_THROWS_AS(stick_breaking_logits(0.0, 3), UsageError);
    CHECK_THROWS_AS(stick_breaking_logits(1.0, 3), UsageError);
}

TEST_CASE("binary concrete sampler") {
    // u = 0.5 means zero noise: s = sigmoid(logit / temperature), exactly
    CHECK(sample_binary_concrete(1.3, 0.5, 0.5) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.6))).epsilon(1e-15));
    CHECK(sample_binary_concrete(0.0, 0.7, 0.5) == doctest::Approx(0.5).epsilon(1e-15));

    // hard limit: temperature to zero with positive total logit pushes to 1
    CHECK(sample_binary_concrete(1.0, 1e-4, 0.6) == doctest::Approx(1.0));
    // boundary noise is clamped, not fatal
    CHECK(sample_binary_concrete(0.0, 0.5, 0.0) > 0.0);
    CHECK(sample_binary_concrete(0.0, 0.5, 1.0) < 1.0);
    CHECK_THROWS_AS(sample_binary_concrete(0.0, 0.0, 0.5), UsageError);
}

TEST_CASE("normal reparameterization") {
    Eigen::VectorXd mu(2), sigma(2), eps(2);
    mu << 1, 2;
    sigma << 1, 1;
    eps << -1, 1;
    Eigen::VectorXd z = sample_normal_positions(mu, sigma, eps);
    CHECK(z(0) == doctest::Approx(0.0));
    CHECK(z(1) == doctest::Approx(3.0));

    eps.setZero();
    CHECK(sample_normal_positions(mu, sigma, eps) == mu);
    sigma.setZero();
    eps << 5, -5;
    CHECK(sample_normal_positions(mu, sigma, eps) == mu);
}

TEST_CASE("dirichlet factors: normalization, positivity, determinism") {
    MatRM shapes = MatRM::Constant(7, 3, 1.3);
    RngStream rs(404);
    MatRM f = sample_dirichlet_factors(shapes, rs, 7);
    CHECK((f.array() > 0.0).all());
    for (int c = 0; c < 3; ++c) CHECK(f.col(c).sum() == doctest::Approx(7.0).epsilon(1e-9));

    // hand normalization: g = (1,3), n = 2 -> factors (0.5, 1.5)
    MatRM g(2, 1);
    g << 1, 3;
    MatRM hand = 2.0 * (g.array().rowwise() / g.colwise().sum().array());
    CHECK(hand(0, 0) == doctest::Approx(0.5));
    CHECK(hand(1, 0) == doctest::Approx(1.5));

    CHECK_THROWS_AS(
        [&] {
            MatRM bad = MatRM::Constant(2, 2, -1.0);
            RngStream r2(1);
            sample_dirichlet_factors(bad, r2, 2);
        }(),
        UsageError);
}

TEST_CASE("dirichlet factors: equal shapes give unit column means") {
    // Monte-Carlo over >= 10^4 draws, 1% tolerance
    const int n = 16, draws = 12000;
    MatRM shapes = MatRM::Constant(n, 1, 2.0);
    RngStream rs(2024);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < draws; ++d) acc += sample_dirichlet_factors(shapes, rs, n).col(0);
    acc /= draws;
    for (int i = 0; i < n; ++i) CHECK(acc(i) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("gamma pathwise gradient matches the analytic mean derivative") {
    // E[Gamma(a,1)] = a, so the average of d(sample)/d(shape) must sit near 1
    const int draws = 100000;
    for (double a : {0.5, 2.3}) {
        RngStream rs(substream(99, "gamma-grad", {static_cast<uint64_t>(a * 10)}).next_u64());
        double acc = 0.0;
        for (int d = 0; d < draws; ++d) {
            double ds;
            rs.gamma(a, &ds);
            acc += ds;
        }
        acc /= draws;
        CHECK(acc == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("gamma sampler moments") {
    const int draws = 200000;
    for (double a : {0.4, 1.0, 3.7}) {
        RngStream rs(substream(7, "gamma-moments", {static_cast<uint64_t>(a * 100)}).next_u64());
        double mean = 0.0, m2 = 0.0;
        for (int d = 0; d < draws; ++d) {
            double x = rs.gamma(a);
            mean += x;
            m2 += x * x;
        }
        mean /= draws;
        m2 /= draws;
        CHECK(mean == doctest::Approx(a).epsilon(0.02));
        CHECK(m2 - mean * mean == doctest::Approx(a).epsilon(0.04));
    }
}

TEST_CASE("concrete sample derivative matches finite differences under common noise") {
    // d/d(logit) of a Binary Concrete sample, fixed uniform noise
    const double temp = 0.5;
    MatRM noise(3, 3);
    RngStream rs(5150);
    for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = rs.uniform();

    MatRM logits(3, 3);
    for (Eigen::Index k = 0; k < logits.size(); ++k) logits.data()[k] = -1.0 + 0.25 * k;

    ad::Tape t;
    ad::Var lv = t.leaf(logits, true);
    ad::Var s = concrete_sample(lv, noise, temp);
    t.backward(ad::sum(s));
    MatRM analytic = t.grad(lv.id);

    const double h = 1e-6;
    for (Eigen::Index k = 0; k < logits.size(); ++k) {
        auto eval = [&](double d) {
            MatRM shifted = logits;
            shifted.data()[k] += d;
            ad::Tape tt;
            return ad::scalar(ad::sum(concrete_sample(tt.leaf(shifted), noise, temp)));
        };
        double fd = (eval(h) - eval(-h)) / (2 * h);
        CHECK(std::abs(fd - analytic.data()[k]) /
                  std::max({std::abs(fd), std::abs(analytic.data()[k]), 1e-4}) <
              1e-4);
    }
}

TEST_CASE("rng streams are independent and reproducible") {
    RngStream a = substream(1, "alpha");
    RngStream b = substream(1, "alpha");
    RngStream c = substream(1, "beta");
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() == b.next_u64());
    RngStream a2 = substream(1, "alpha");
    CHECK(a2.next_u64() != c.next_u64());

    // uniform stays inside the open interval
    RngStream u(42);
    for (int i = 0; i < 10000; ++i) {
        double x = u.uniform();
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

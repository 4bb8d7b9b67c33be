#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <numbers>

#include "panel_logit/errors.hpp"
#include "panel_logit/model.hpp"
#include "panel_logit/rng.hpp"

using namespace panel_logit;

namespace {

ModelSpec dummies_spec() { return ModelSpec(TimeDummies{1.0, {0.1, -0.1, 0.3, -0.3, -0.1, 0.3, 0.5, 0.2}}); }

// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1), from the Jacobi matrix.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        weights[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Philox4x32Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Philox4x32Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed uniforms are open-interval and keyed") {
    KeyedUniform u(99), v(100);
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double x = u(3, i, 2);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(u(0, 1, 2) == u(0, 1, 2));
    CHECK(u(0, 1, 2) != v(0, 1, 2));
    CHECK(u(0, 1, 2) != u(1, 1, 2));
    CHECK(u(0, 1, 2) != u(0, 2, 2));
    CHECK(u(0, 1, 2) != u(0, 1, 3));
}

TEST_CASE("logit_prob closed forms") {
    CHECK(logit_prob(0, 1, 0, 0) == 0.5);
    CHECK(logit_prob(0, 1, 1, 0) == doctest::Approx(std::exp(1.0) / (1 + std::exp(1.0))).epsilon(1e-15));
    CHECK(logit_prob(0, 1, 1, 0) == doctest::Approx(0.7310585786).epsilon(1e-10));

    using big = boost::multiprecision::cpp_dec_float_50;
    const big e = boost::multiprecision::exp(big("1.5"));
    const double ref = static_cast<double>(e / (1 + e));
    CHECK(std::abs(logit_prob(0.3, 1, 1, 0.2) - ref) <= 1e-16);
}

TEST_CASE("logit_prob is stable and monotone") {
    for (double x : {-700.0, -300.0, 300.0, 700.0}) {
        const double p = logit_prob(x, 0, 0, 0);
        CHECK(std::isfinite(p));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(logit_prob(-700, 0, 0, 0) > 0.0);
    double prev = 0.0;
    for (double x = -10; x <= 10; x += 0.25) {
        CHECK(logit_prob(x, 0.5, 1, 0.1) > prev);
        CHECK(logit_prob(0.1, 0.5, 1, x) > logit_prob(0.1, 0.5, 1, x - 0.25));
        CHECK(logit_prob(0.1, x, 1, 0.2) > logit_prob(0.1, x - 0.25, 1, 0.2));
        CHECK(logit_prob(0.1, x, 0, 0.2) == logit_prob(0.1, x - 0.25, 0, 0.2));
        prev = logit_prob(x, 0.5, 1, 0.1);
    }
}

TEST_CASE("model spec accessors") {
    const ModelSpec d = dummies_spec();
    CHECK(d.delta() == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(d.effect_step(6) == doctest::Approx(0.4));
    CHECK(d.effect_step(7) == doctest::Approx(0.2));
    CHECK(d.effect_step(8) == doctest::Approx(-0.3));
    CHECK(d.phi(7) == doctest::Approx(std::exp(0.2)));
    CHECK(d.last_period() == 8);
    const ModelSpec t(TimeTrend{1.0, 0.3, 1.0});
    CHECK(t.effect(1) == 0.0);
    CHECK(t.effect(5) == doctest::Approx(1.2));
    CHECK(t.effect_step(5) == doctest::Approx(0.3));
    CHECK_THROWS_AS(ModelSpec(TimeDummies{NAN, {0.0}}), ConfigError);
    CHECK_THROWS_AS(ModelSpec(TimeTrend{1.0, INFINITY, 0.0}), ConfigError);
}

TEST_CASE("simulate_panel validates its inputs") {
    const ModelSpec d = dummies_spec();
    CHECK_THROWS_AS(simulate_panel(d, {10, 1, 0.5, 1}), ConfigError);
    CHECK_THROWS_AS(simulate_panel(d, {0, 8, 0.5, 1}), ConfigError);
    CHECK_THROWS_AS(simulate_panel(d, {10, 8, -1.0, 1}), ConfigError);
    CHECK_THROWS_AS(simulate_panel(d, {10, 9, 0.5, 1}), ConfigError);
    CHECK_NOTHROW(simulate_panel(ModelSpec(TimeTrend{1, 0.3, 1}), {10, 12, 0.5, 1}));
}

TEST_CASE("homogeneous fair panel has mean one half") {
    const ModelSpec zero(TimeDummies{0.0, std::vector<double>(8, 0.0)});
    const PanelData p = simulate_panel(zero, {125000, 8, 0.0, 5}, 0, 2);
    double sum = 0;
    for (std::int64_t i = 0; i < p.n(); ++i)
        for (int t = 1; t <= 8; ++t) sum += p.at(i, t);
    CHECK(std::abs(sum / 1e6 - 0.5) <= 0.002);
}

TEST_CASE("simulation is deterministic across calls and thread counts") {
    const ModelSpec d = dummies_spec();
    const DgpConfig cfg{20000, 8, 0.5, 17};
    const PanelData a = simulate_panel(d, cfg, 3, 1);
    CHECK(a == simulate_panel(d, cfg, 3, 1));
    CHECK(a == simulate_panel(d, cfg, 3, 4));
    CHECK_FALSE(a == simulate_panel(d, cfg, 4, 1));
    CHECK(draw_fixed_effect(cfg, 3, 11) == draw_fixed_effect(cfg, 3, 11));
    CHECK(a.t0() == 1);
    CHECK(a.periods() == 8);
    CHECK(a.id(0) == "1");
}

TEST_CASE("fixed effects are Gaussian with the configured variance") {
    const DgpConfig cfg{200000, 8, 0.5, 23};
    double s = 0, s2 = 0;
    for (std::int64_t i = 0; i < cfg.n_individuals; ++i) {
        const double e = draw_fixed_effect(cfg, 0, i);
        s += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(cfg.n_individuals);
    CHECK(std::abs(s / n) < 4 * std::sqrt(0.5 / n));
    CHECK(s2 / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("homogeneous transitions converge to logit_prob") {
    const ModelSpec m(TimeDummies{0.0, {0.2, -0.4, 0.6, 0.1, -0.2, 0.3, 0.0, 0.5}});
    const PanelData p = simulate_panel(m, {1000000, 8, 0.0, 31}, 0, 2);
    for (int t : {2, 5, 8}) {
        double ones = 0;
        for (std::int64_t i = 0; i < p.n(); ++i) ones += p.at(i, t);
        const double expect = logit_prob(0, 0, 0, m.effect(t));
        CHECK(std::abs(ones / 1e6 - expect) <= 4 * std::sqrt(expect * (1 - expect) / 1e6));
    }
}

TEST_CASE("transition frequency matches quadrature over the fixed effect") {
    const ModelSpec d = dummies_spec();
    const DgpConfig cfg{1000000, 8, 0.5, 2024};
    const PanelData p = simulate_panel(d, cfg, 0, 2);
    double n11 = 0, n1 = 0;
    for (std::int64_t i = 0; i < p.n(); ++i)
        if (p.at(i, 4)) {
            ++n1;
            n11 += p.at(i, 5);
        }
    const double empirical = n11 / n1;

    std::vector<double> z, w;
    gauss_hermite(80, z, w);
    double joint = 0, marginal = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double eta = std::sqrt(cfg.sigma_eta_sq) * z[k];
        double p1 = logit_prob(eta, 0, 0, d.effect(1));
        for (int t = 2; t <= 4; ++t) p1 = p1 * logit_prob(eta, 1, 1, d.effect(t)) + (1 - p1) * logit_prob(eta, 1, 0, d.effect(t));
        marginal += w[k] * p1;
        joint += w[k] * p1 * logit_prob(eta, 1, 1, d.effect(5));
    }
    const double expect = joint / marginal;
    CHECK(std::abs(empirical - expect) <= 3 * std::sqrt(expect * (1 - expect) / n1));
}

TEST_CASE("panel slicing keeps period labels") {
    const PanelData p = simulate_panel(dummies_spec(), {50, 8, 0.5, 1});
    const PanelData s = p.slice(4, 8);
    CHECK(s.t0() == 4);
    CHECK(s.periods() == 5);
    for (std::int64_t i = 0; i < p.n(); ++i)
        for (int t = 4; t <= 8; ++t) CHECK(s.at(i, t) == p.at(i, t));
    CHECK_THROWS_AS(p.slice(0, 3), ConfigError);
}

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "panel_logit/oracle.hpp"

using namespace panel_logit;

namespace {

double lg(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ModelSpec generic() { return ModelSpec(TimeDummies{0.8, {0.1, -0.2, 0.3, 0.0, -0.4, 0.5, 0.2, -0.3}}); }

}  // namespace

TEST_CASE("fair model gives uniform paths") {
    const ModelSpec fair(TimeDummies{0.0, std::vector<double>(8, 0.0)});
    for (int yi : {0, 1}) {
        const PathLaw law = path_law(fair, 7, {0.0, yi, 0});
        for (double p : law) CHECK(p == doctest::Approx(0.125).epsilon(1e-15));
    }
}

TEST_CASE("path law is the product of transitions") {
    const ModelSpec s = generic();
    const ConditioningState st{0.7, 1, 0};
    const PathLaw law = path_law(s, 6, st);
    CHECK(std::accumulate(law.begin(), law.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto& td = s.dummies().td;
    auto step = [&](int prev, int cur, int period) {
        const double p = lg(st.eta + 0.8 * prev + td[static_cast<std::size_t>(period - 1)]);
        return cur ? p : 1.0 - p;
    };
    for (unsigned path = 0; path < 8; ++path) {
        const int a = (path >> 2) & 1, b = (path >> 1) & 1, c = path & 1;
        const double want = step(1, a, 5) * step(a, b, 6) * step(b, c, 7);
        CHECK(law[path] == doctest::Approx(want).epsilon(1e-14));
        const Window5 w = path_window(st, path);
        CHECK(w.y_tm2 == 1);
        CHECK(w.y_tm1 == a);
        CHECK(w.y_t == b);
        CHECK(w.y_tp1 == c);
    }
}

TEST_CASE("scaled moment functions have zero conditional mean") {
    const ModelSpec s = generic();
    const PeriodParams p = period_params(s, 7);
    for (double eta : {-2.0, 0.0, 1.3})
        for (int yi : {0, 1})
            for (int y3 : {0, 1}) {
                const ConditioningState st{eta, yi, y3};
                CHECK(std::abs(conditional_moment(s, 7, st, [&](const Window5& w) { return hbar_u(w, p); })) < 1e-13);
                CHECK(std::abs(conditional_moment(s, 7, st, [&](const Window5& w) { return hbar_upsilon(w, p); })) <
                      1e-13);
                const auto alpha = alpha_from_params(Family::A, p);
                for (int m = 1; m <= 4; ++m)
                    CHECK(std::abs(conditional_moment(
                              s, 7, st, [&](const Window5& w) { return transformed_moment_row(Family::A, m, w, alpha); })) <
                          1e-13);
            }
}

TEST_CASE("wrong parameters give a nonzero mean") {
    const ModelSpec s = generic();
    PeriodParams p = period_params(s, 7);
    p.delta = std::exp(0.3) - 1.0;
    const ConditioningState st{0.5, 1, 0};
    CHECK(std::abs(conditional_moment(s, 7, st, [&](const Window5& w) { return hbar_u(w, p); })) > 1e-4);
}

TEST_CASE("pattern law and population recovery") {
    const ModelSpec s = generic();
    const EtaGrid grid = EtaGrid::uniform({-1.0, 0.5});
    const PatternLaw law = pattern_law(s, 7, grid);
    CHECK(std::accumulate(law.begin(), law.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    const PatternLaw chain = pattern_law(s, 7, grid, InitialLaw::model_chain());
    CHECK(std::accumulate(chain.begin(), chain.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(pattern_law(s, 3, grid, InitialLaw::model_chain()), ConfigError);
    CHECK_THROWS_AS(pattern_law(s, 8, grid), ConfigError);
    CHECK_THROWS_AS(pattern_law(s, 7, EtaGrid{{0.0, 1.0}, {0.5, 0.6}}), ConfigError);

    const auto truth = alpha_from_spec(Family::A, s, 7);
    for (const InitialLaw& init : {InitialLaw::marginal(0.3), InitialLaw::model_chain()}) {
        const LinearSystem sys = population_system(Family::A, s, 7, Variant::minus_3_7(), grid, init);
        const Eigen::VectorXd a = solve(sys);
        for (std::size_t k = 0; k < sys.columns().size(); ++k)
            CHECK(a(static_cast<Eigen::Index>(k)) ==
                  doctest::Approx(truth[static_cast<std::size_t>(sys.columns()[k])]).epsilon(1e-9));
    }
}

TEST_CASE("family C population system") {
    const ModelSpec s(TimeTrend{0.6, 0.3, 1.0});
    const LinearSystem sys = population_system(Family::C, s, 7, Variant::full(), EtaGrid::uniform({-1, 0, 1}));
    const Eigen::VectorXd a = solve(sys);
    const auto truth = alpha_from_spec(Family::C, s, 7);
    for (std::size_t k = 0; k < truth.size(); ++k)
        CHECK(a(static_cast<Eigen::Index>(k)) == doctest::Approx(truth[k]).epsilon(1e-9));
    CHECK_THROWS_AS(alpha_from_spec(Family::C, generic(), 7), ConfigError);
}

TEST_CASE("degenerate fixed-effect support") {
    const ModelSpec s(TimeDummies{0.0, std::vector<double>(8, 0.0)});
    const LinearSystem sys = population_system(Family::A, s, 7, Variant::minus_3_7(), EtaGrid::uniform({0.0}));
    CHECK_THROWS_AS(solve(sys), SingularSystem);
}

TEST_CASE("moment value ranks") {
    const ModelSpec s = generic();
    CHECK(moment_value_matrix(Family::A, s, 7, {1, 2, 3}).rows() == 3);
    CHECK(moment_value_matrix(Family::A, s, 7, {1, 2, 3}).cols() == 32);
    CHECK(moment_rank(Family::A, s, 7, {1, 2, 3, 4, 5, 6, 7, 8}) == 8);
    CHECK(moment_rank(Family::B, s, 7, {1, 2, 3, 4, 5, 6, 7, 8}) == 8);
    CHECK(moment_rank(Family::A, s, 7, {1, 1}) == 1);
    const ModelSpec tr(TimeTrend{0.6, 0.3, 1.0});
    CHECK(moment_rank(Family::C, tr, 7, {1, 2, 3, 4, 5, 6, 7, 8}) == 8);
}

TEST_CASE("verification checks") {
    for (const CheckResult& r : run_verify(all_verify_levels())) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
    }
    VerifyOptions bad;
    bad.mutate_kernel_sign = true;
    CHECK(!check_identities(bad).passed);
    CHECK(!check_zero_mean(bad).passed);
    CHECK_THROWS_AS(run_verify({}), ConfigError);
    for (VerifyLevel l : all_verify_levels()) CHECK(parse_verify_level(verify_level_name(l)) == l);
    CHECK_THROWS_AS(parse_verify_level("everything"), ConfigError);
}

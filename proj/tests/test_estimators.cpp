#include <doctest.h>

#include <cmath>

#include "panel_logit/estimators.hpp"
#include "panel_logit/oracle.hpp"

using namespace panel_logit;

namespace {

const ModelSpec& paper_dummies() {
    static const ModelSpec s(TimeDummies{1.0, {0.1, -0.1, 0.3, -0.3, -0.1, 0.3, 0.5, 0.2}});
    return s;
}

const AggregateStats& sample_stats() {
    static const AggregateStats st = aggregate(simulate_panel(paper_dummies(), {400000, 8, 0.5, 77}), 7);
    return st;
}

ModelSpec spec_at7(double gamma, double dtd_t, double dtd_tp1) {
    std::vector<double> td{0.1, -0.1, 0.3, -0.3, -0.1, 0.3};
    td.push_back(td.back() + dtd_t);
    td.push_back(td.back() + dtd_tp1);
    return ModelSpec(TimeDummies{gamma, td});
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (const Variant& v : {Variant::minus_row(4), Variant::minus_3_7(), Variant::minus_1_5(), Variant::full()})
        CHECK(Variant::parse(v.name()) == v);
    CHECK_THROWS_AS(Variant::parse("minus-r:9"), ConfigError);
    CHECK_THROWS_AS(Variant::parse("minus-2-6"), ConfigError);
}

TEST_CASE("system shapes and dropped columns") {
    const AggregateStats& st = sample_stats();
    const LinearSystem full = build_system(Family::A, st, Variant::full());
    CHECK(full.x().rows() == 8);
    CHECK(full.x().cols() == 7);
    CHECK_THROWS_AS(solve(full), ConfigError);
    for (int r = 1; r <= 8; ++r) {
        const LinearSystem s = build_system(Family::A, st, Variant::minus_row(r));
        CHECK(s.x().rows() == 7);
        CHECK(s.x().cols() == 7);
    }
    auto names = [&](Family f, Variant v) { return build_system(f, st, v).column_names(); };
    CHECK(names(Family::A, Variant::minus_3_7()) == std::vector<std::string>{"a", "b", "c", "d", "f", "g"});
    CHECK(names(Family::A, Variant::minus_1_5()) == std::vector<std::string>{"a", "b", "c", "e", "f", "g"});
    CHECK(names(Family::B, Variant::minus_3_7()) == std::vector<std::string>{"a", "b", "c", "e", "f", "g"});
    CHECK(names(Family::B, Variant::minus_1_5()) == std::vector<std::string>{"a", "b", "c", "d", "f", "g"});
    const LinearSystem c = build_system_c(st);
    CHECK(c.x().rows() == 8);
    CHECK(c.x().cols() == 8);
    CHECK_THROWS_AS(build_system(Family::C, st, Variant::full()), ConfigError);
    CHECK_THROWS_AS(build_any(Family::C, st, Variant::minus_3_7()), ConfigError);
}

TEST_CASE("rows are placed as the stacked averages") {
    const AggregateStats& st = sample_stats();
    const LinearSystem s = build_system(Family::A, st, Variant::full());
    using S = Selector;
    // iota: -Theta1(-) | b Theta2(-), c Theta3(-), d Theta4(-)
    CHECK(s.y()(0) == -st.theta_bar(1, S::Minus));
    CHECK(s.x()(0, 1) == st.theta_bar(2, S::Minus));
    CHECK(s.x()(0, 2) == st.theta_bar(3, S::Minus));
    CHECK(s.x()(0, 3) == st.theta_bar(4, S::Minus));
    CHECK(s.x()(0, 0) == 0.0);
    // kappa: -Xi4(+)
    CHECK(s.y()(2) == -st.xi_bar(4, S::Plus));
    CHECK(s.y()(3) == -st.xi_bar(4, S::Minus));
    // interacted iota*: -Theta1(++), iota* puts alpha_a on Theta4
    CHECK(s.y()(5) == -st.theta_bar(1, S::PlusPlus));
    CHECK(s.x()(5, 0) == st.theta_bar(4, S::PlusPlus));
    CHECK(s.row_labels()[5] == "y_{t-3}*iota*");
    const LinearSystem m37 = build_system(Family::A, st, Variant::minus_3_7());
    CHECK(m37.stacked_row_number(2) == 4);
    CHECK(m37.stacked_row_number(5) == 8);
}

TEST_CASE("sample-mean rows equal the average of individual terms") {
    const AggregateStats& st = sample_stats();
    for (Family f : {Family::A, Family::B, Family::C}) {
        const LinearSystem s = build_any(f, st, f == Family::C ? Variant::full() : Variant::minus_row(2));
        Eigen::VectorXd y = Eigen::VectorXd::Zero(s.y().size()), yi;
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(s.x().rows(), s.x().cols()), xi;
        for (unsigned p = 0; p < kPatterns; ++p) {
            s.individual_terms(Window5::from_pattern(p), yi, xi);
            y += st.frequency(p) * yi;
            x += st.frequency(p) * xi;
        }
        CHECK((y - s.y()).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((x - s.x()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("reciprocal condition") {
    CHECK(reciprocal_condition(Eigen::MatrixXd::Identity(5, 5)) == 1.0);
    CHECK(reciprocal_condition(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
    Eigen::Matrix2d m;
    m << 1, 2, 2, 4;
    CHECK(reciprocal_condition(m) == 0.0);
    m << 2, 0, 0, 1e-3;
    CHECK(reciprocal_condition(m) == doctest::Approx(5e-4));
}

TEST_CASE("closed-form guards equal the determinant") {
    const AggregateStats& st = sample_stats();
    struct Case {
        Family f;
        Variant v;
    };
    for (const Case& c : {Case{Family::A, Variant::minus_3_7()}, Case{Family::A, Variant::minus_row(3)},
                          Case{Family::B, Variant::minus_1_5()}, Case{Family::B, Variant::minus_row(1)},
                          Case{Family::C, Variant::full()}}) {
        const LinearSystem s = build_any(c.f, st, c.v);
        const auto g = uniqueness_guards(s);
        REQUIRE(!g.empty());
        double prod = 1.0;
        for (const auto& d : g) prod *= d.value;
        const double det = s.x().determinant();
        CHECK(std::abs(std::abs(prod) - std::abs(det)) <= 1e-9 * std::abs(det));
    }
    CHECK(uniqueness_guards(build_system(Family::A, st, Variant::minus_row(5))).empty());
}

TEST_CASE("population systems solve to the true alpha") {
    const ModelSpec spec = spec_at7(1.0, 0.2, -0.1);
    const EtaGrid grid = EtaGrid::uniform({-1, 0, 1});
    for (Family f : {Family::A, Family::B})
        for (Variant v : {Variant::minus_3_7(), Variant::minus_1_5(), Variant::minus_row(6)}) {
            const LinearSystem s = population_system(f, spec, 7, v, grid);
            const Eigen::VectorXd a = solve(s);
            const auto truth = alpha_from_spec(f, spec, 7);
            for (std::size_t k = 0; k < s.columns().size(); ++k)
                CHECK(a(static_cast<Eigen::Index>(k)) ==
                      doctest::Approx(truth[static_cast<std::size_t>(s.columns()[k])]).epsilon(1e-8));
            CHECK((s.x() * a - s.y()).norm() <= 1e-10 * s.y().norm());
        }
}

TEST_CASE("a panel without y_{t-2} = 1 gives zero rows and a singular system") {
    PanelData p = simulate_panel(paper_dummies(), {5000, 8, 0.5, 3});
    for (std::int64_t i = 0; i < p.n(); ++i) p.set(i, 5, 0);
    const LinearSystem s = build_system(Family::A, aggregate(p, 7), Variant::full());
    for (int r : {1, 2, 5, 6}) {
        CHECK(s.y()(r) == 0.0);
        CHECK(s.x().row(r).isZero());
    }
    const LinearSystem m = build_system(Family::A, aggregate(p, 7), Variant::minus_3_7());
    CHECK_THROWS_AS(solve(m), SingularSystem);
    try {
        solve(m);
    } catch (const SingularSystem& e) {
        CHECK(e.rcond() < kSingularRcond);
        CHECK(e.guards().size() == 3);
        CHECK(std::string(e.what()).find("Lambda_A") != std::string::npos);
    }
}

TEST_CASE("variance: symmetric, PSD, and 1/N under duplication") {
    const AggregateStats& st = sample_stats();
    const LinearSystem s = build_system(Family::A, st, Variant::minus_3_7());
    const TransformedEstimate e = estimate(s);
    CHECK((e.vcov - e.vcov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.vcov);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * e.vcov.trace());

    PatternCounts doubled = st.counts();
    for (auto& c : doubled) c *= 2;
    const AggregateStats st2 = AggregateStats::from_counts(7, doubled);
    const TransformedEstimate e2 = estimate(build_system(Family::A, st2, Variant::minus_3_7()));
    CHECK(e2.alpha_hat == e.alpha_hat);
    CHECK(e2.vcov == e.vcov / 2.0);
    CHECK(e.se("a") == std::sqrt(e.vcov(0, 0)));
    CHECK_THROWS_AS(e.index("e"), ConfigError);
}

TEST_CASE("zero residuals give a singular weight") {
    const AggregateStats zero = aggregate(PanelData(100, 8, 1), 7);
    const LinearSystem s = build_system(Family::A, zero, Variant::minus_3_7());
    CHECK_THROWS_AS(variance(s, Eigen::VectorXd::Ones(6)), SingularWeight);
    CHECK_THROWS_AS(solve(s), SingularSystem);
}

TEST_CASE("family C from two windows of the same panel") {
    const ModelSpec trend(TimeTrend{1.0, 0.3, 1.0});
    const PanelData p = simulate_panel(trend, {20000, 8, 0.5, 8});
    const AggregateStats t7 = aggregate(p, 7), t6 = aggregate(p, 6);
    const LinearSystem a = build_system_c(t7, t6);
    const LinearSystem b = build_system_c(t7);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    CHECK_THROWS_AS(build_system_c(t7, aggregate(p, 5)), ConfigError);
    const PanelData other = simulate_panel(trend, {20000, 8, 0.5, 9});
    CHECK_THROWS_AS(build_system_c(t7, aggregate(other, 6)), ConfigError);
    const PanelData smaller = simulate_panel(trend, {100, 8, 0.5, 8});
    CHECK_THROWS_AS(build_system_c(t7, aggregate(smaller, 6)), ConfigError);
}

#include <doctest.h>

#include "panel_logit/aggregation.hpp"
#include "panel_logit/errors.hpp"

using namespace panel_logit;

namespace {

PanelData random_panel(std::int64_t n, int periods, std::uint64_t seed) {
    const ModelSpec spec(TimeDummies{0.8, std::vector<double>(static_cast<std::size_t>(periods), 0.1)});
    return simulate_panel(spec, {n, periods, 1.0, seed});
}

constexpr Selector kSelectors[] = {Selector::Minus, Selector::Plus, Selector::MinusPlus, Selector::PlusPlus};

}  // namespace

TEST_CASE("all-zero panel has zero averages") {
    PanelData p(40, 5, 1);
    const AggregateStats st = aggregate(p, 4);
    for (KernelKind k : {KernelKind::Theta, KernelKind::Xi})
        for (int j = 1; j <= 4; ++j)
            for (Selector s : kSelectors) CHECK(st.bar(k, j, s) == 0.0);
    CHECK(st.n() == 40);
}

TEST_CASE("single individual window") {
    PanelData p(1, 5, 1);
    const int y[] = {1, 0, 0, 1, 0};
    for (int t = 1; t <= 5; ++t) p.set(0, t, static_cast<std::uint8_t>(y[t - 1]));
    const AggregateStats st = aggregate(p, 4);
    CHECK(st.theta_bar(1, Selector::Minus) == 1.0);
    CHECK(st.theta_bar(1, Selector::MinusPlus) == 1.0);
    CHECK(st.theta_bar(1, Selector::Plus) == 0.0);
    const Window5 w{1, 0, 0, 1, 0};
    for (int j = 1; j <= 4; ++j) {
        CHECK(st.theta_bar(j, Selector::Minus) == theta_kernels(w)[static_cast<std::size_t>(j - 1)]);
        CHECK(st.xi_bar(j, Selector::Minus) == xi_kernels(w)[static_cast<std::size_t>(j - 1)]);
        CHECK(st.xi_bar(j, Selector::Plus) == 0.0);
    }
}

TEST_CASE("averages match a brute-force filter") {
    const PanelData p = random_panel(3000, 7, 3);
    for (int t = 4; t <= 6; ++t) {
        const AggregateStats st = aggregate(p, t);
        for (KernelKind k : {KernelKind::Theta, KernelKind::Xi})
            for (int j = 1; j <= 4; ++j)
                for (Selector s : kSelectors) {
                    double sum = 0;
                    for (std::int64_t i = 0; i < p.n(); ++i) {
                        const Window5 w{p.at(i, t - 3), p.at(i, t - 2), p.at(i, t - 1), p.at(i, t), p.at(i, t + 1)};
                        int keep = 0;
                        switch (s) {
                            case Selector::Minus: keep = w.y_tm2 == 0; break;
                            case Selector::Plus: keep = w.y_tm2 == 1; break;
                            case Selector::MinusPlus: keep = w.y_tm2 == 0 && w.y_tm3 == 1; break;
                            case Selector::PlusPlus: keep = w.y_tm2 == 1 && w.y_tm3 == 1; break;
                        }
                        const KernelVector kv = k == KernelKind::Theta ? theta_kernels(w) : xi_kernels(w);
                        if (keep) sum += kv[static_cast<std::size_t>(j - 1)];
                    }
                    CHECK(st.bar(k, j, s) == doctest::Approx(sum / 3000.0).epsilon(1e-15));
                }
    }
}

TEST_CASE("selectors partition the unconditional mean") {
    const AggregateStats st = aggregate(random_panel(5000, 6, 9), 4);
    for (KernelKind k : {KernelKind::Theta, KernelKind::Xi})
        for (int j = 1; j <= 4; ++j) {
            CHECK(st.bar(k, j, Selector::Minus) + st.bar(k, j, Selector::Plus) ==
                  doctest::Approx(st.unconditional_bar(k, j)).epsilon(1e-15));
            CHECK(std::abs(st.bar(k, j, Selector::Minus)) <= 1.0);
        }
    for (int j : {1, 2, 4})
        CHECK(std::abs(st.theta_bar(j, Selector::MinusPlus)) <= std::abs(st.theta_bar(j, Selector::Minus)));
}

TEST_CASE("one-period-back averages equal the averages of the earlier window") {
    const PanelData p = random_panel(4000, 8, 12);
    const AggregateStats now = aggregate(p, 6);
    const AggregateStats before = aggregate(p, 5);
    for (KernelKind k : {KernelKind::Theta, KernelKind::Xi})
        for (int j = 1; j <= 4; ++j)
            for (Selector s : {Selector::Minus, Selector::Plus}) CHECK(now.bar(k, j, s, 1) == before.bar(k, j, s));
    CHECK_THROWS_AS(now.bar(KernelKind::Theta, 1, Selector::PlusPlus, 1), ConfigError);
}

TEST_CASE("shards merge to the single pass exactly") {
    const PanelData p = random_panel(6000, 6, 5);
    PanelData a(3000, 6, 1), b(3000, 6, 1);
    for (std::int64_t i = 0; i < 3000; ++i)
        for (int t = 1; t <= 6; ++t) {
            a.set(i, t, p.at(i, t));
            b.set(i, t, p.at(i + 3000, t));
        }
    CHECK(merge(aggregate(a, 4), aggregate(b, 4)) == aggregate(p, 4));
    CHECK(aggregate(p, 4, 1) == aggregate(p, 4, 3));
    CHECK_THROWS_AS(merge(aggregate(a, 4), aggregate(b, 5)), ConfigError);
}

TEST_CASE("aggregate rejects bad windows and empty panels") {
    const PanelData p = random_panel(10, 6, 1);
    CHECK_THROWS_AS(aggregate(p, 3), ConfigError);
    CHECK_THROWS_AS(aggregate(p, 6), ConfigError);
    CHECK_THROWS_AS(aggregate(PanelData(0, 6, 1), 4), ConfigError);
    CHECK_THROWS_AS(AggregateStats::from_counts(4, PatternCounts{}), ConfigError);
}

TEST_CASE("population statistics from a law") {
    PatternLaw law{};
    law[Window5{1, 0, 0, 1, 0}.pattern()] = 0.25;
    law[Window5{0, 1, 1, 1, 0}.pattern()] = 0.75;
    const AggregateStats st = AggregateStats::from_law(4, law);
    CHECK(st.is_population());
    CHECK(st.n() == 0);
    CHECK(st.theta_bar(1, Selector::MinusPlus) == 0.25);
    CHECK(st.xi_bar(1, Selector::Plus) == -0.75);
}

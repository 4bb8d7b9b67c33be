#include "panel_logit/aggregation.hpp"

#include <mutex>
#include <string>

#include "panel_logit/errors.hpp"
#include "panel_logit/parallel.hpp"

namespace panel_logit {

std::string_view selector_name(Selector s) {
    switch (s) {
        case Selector::Minus: return "-";
        case Selector::Plus: return "+";
        case Selector::MinusPlus: return "-+";
        case Selector::PlusPlus: return "++";
    }
    return "?";
}

int selector_value(Selector s, const Window5& w) {
    switch (s) {
        case Selector::Minus: return 1 - w.y_tm2;
        case Selector::Plus: return w.y_tm2;
        case Selector::MinusPlus: return (1 - w.y_tm2) * w.y_tm3;
        case Selector::PlusPlus: return w.y_tm2 * w.y_tm3;
    }
    return 0;
}

int kernel_value(KernelKind k, int j, const Window5& w, int lag) {
    const Window5 v = lag == 0 ? w : w.lagged();
    const KernelVector kv = k == KernelKind::Theta ? theta_kernels(v) : xi_kernels(v);
    return kv[static_cast<std::size_t>(j - 1)];
}

int selector_at(Selector s, const Window5& w, int lag) {
    if (lag == 0) return selector_value(s, w);
    if (s == Selector::MinusPlus || s == Selector::PlusPlus)
        throw ConfigError("interacted selectors are not available one period back");
    return selector_value(s, w.lagged());
}

AggregateStats AggregateStats::from_counts(int window_t, const PatternCounts& counts) {
    AggregateStats st;
    st.window_t_ = window_t;
    st.counts_ = counts;
    for (unsigned p = 0; p < kPatterns; ++p) {
        if (counts[p] < 0) throw ConfigError("aggregate: negative pattern count");
        st.n_ += counts[p];
        st.weight_[p] = static_cast<double>(counts[p]);
    }
    if (st.n_ == 0) throw ConfigError("aggregate: no individuals");
    st.total_ = static_cast<double>(st.n_);
    st.compute();
    return st;
}

AggregateStats AggregateStats::from_law(int window_t, const PatternLaw& law) {
    AggregateStats st;
    st.window_t_ = window_t;
    st.population_ = true;
    for (unsigned p = 0; p < kPatterns; ++p) {
        if (!(law[p] >= 0.0)) throw ConfigError("aggregate: negative pattern probability");
        st.weight_[p] = law[p];
        st.total_ += law[p];
    }
    if (!(st.total_ > 0.0)) throw ConfigError("aggregate: pattern law has zero mass");
    st.compute();
    return st;
}

void AggregateStats::compute() {
    for (int kind = 0; kind < 2; ++kind) {
        const auto k = static_cast<KernelKind>(kind);
        for (int lag = 0; lag < 2; ++lag) {
            for (int j = 1; j <= 4; ++j) {
                for (int s = 0; s < 4; ++s) {
                    const auto sel = static_cast<Selector>(s);
                    if (lag == 1 && s >= 2) {
                        bars_[kind][lag][j - 1][s] = 0.0;
                        continue;
                    }
                    // Integer-valued weights keep this sum exact for panels.
                    double sum = 0.0;
                    for (unsigned p = 0; p < kPatterns; ++p) {
                        const Window5 w = Window5::from_pattern(p);
                        const int v = kernel_value(k, j, w, lag) * selector_at(sel, w, lag);
                        if (v != 0) sum += v * weight_[p];
                    }
                    bars_[kind][lag][j - 1][s] = sum / total_;
                }
            }
        }
    }
}

double AggregateStats::bar(KernelKind k, int j, Selector s, int lag) const {
    if (j < 1 || j > 4) throw ConfigError("kernel index must be in 1..4");
    if (lag != 0 && lag != 1) throw ConfigError("lag must be 0 or 1");
    if (lag == 1 && (s == Selector::MinusPlus || s == Selector::PlusPlus))
        throw ConfigError("interacted selectors are not available one period back");
    return bars_[static_cast<int>(k)][lag][j - 1][static_cast<int>(s)];
}

double AggregateStats::unconditional_bar(KernelKind k, int j) const {
    double sum = 0.0;
    for (unsigned p = 0; p < kPatterns; ++p) {
        const int v = kernel_value(k, j, Window5::from_pattern(p), 0);
        if (v != 0) sum += v * weight_[p];
    }
    return sum / total_;
}

PatternCounts window_counts(const PanelData& panel, int t, unsigned threads) {
    if (!panel.has_period(t - 3) || !panel.has_period(t + 1))
        throw ConfigError("aggregate: window t=" + std::to_string(t) + " needs periods " + std::to_string(t - 3) +
                          ".." + std::to_string(t + 1) + ", panel covers " + std::to_string(panel.t0()) + ".." +
                          std::to_string(panel.last_period()));
    if (panel.n() == 0) throw ConfigError("aggregate: no individuals");
    const int c0 = t - 3 - panel.t0();
    PatternCounts total{};
    std::mutex mutex;
    parallel_for_chunks(panel.n(), 1 << 16, threads, [&](std::int64_t begin, std::int64_t end) {
        PatternCounts local{};
        for (std::int64_t i = begin; i < end; ++i) {
            const std::uint8_t* y = panel.row(i) + c0;
            const unsigned p = static_cast<unsigned>(y[0] << 4 | y[1] << 3 | y[2] << 2 | y[3] << 1 | y[4]);
            ++local[p];
        }
        std::lock_guard lock(mutex);
        for (unsigned p = 0; p < kPatterns; ++p) total[p] += local[p];
    });
    return total;
}

AggregateStats aggregate(const PanelData& panel, int t, unsigned threads) {
    return AggregateStats::from_counts(t, window_counts(panel, t, threads));
}

AggregateStats merge(const AggregateStats& a, const AggregateStats& b) {
    if (a.is_population() || b.is_population()) throw ConfigError("merge: population statistics cannot be merged");
    if (a.window_t() != b.window_t()) throw ConfigError("merge: statistics refer to different windows");
    PatternCounts c{};
    for (unsigned p = 0; p < kPatterns; ++p) c[p] = a.counts()[p] + b.counts()[p];
    return AggregateStats::from_counts(a.window_t(), c);
}

}  // namespace panel_logit

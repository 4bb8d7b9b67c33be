#pragma once

// Sample averages of the Theta / Xi kernels split by (y_{t-2}, y_{t-3}).
//
// Each individual contributes through its outcome pattern on the window
// t-3..t+1 only, so the 32 pattern counts are a sufficient statistic for
// every average and for every per-individual residual used in variance
// estimation. Counts merge exactly across shards.

#include <array>
#include <cstdint>

#include "panel_logit/kernels.hpp"
#include "panel_logit/model.hpp"

namespace panel_logit {

/// (-) : y_{t-2} = 0, (+) : y_{t-2} = 1, (-+) / (++) additionally y_{t-3} = 1.
enum class Selector { Minus = 0, Plus = 1, MinusPlus = 2, PlusPlus = 3 };

std::string_view selector_name(Selector s);

/// Indicator of the selector on a window.
int selector_value(Selector s, const Window5& w);

using PatternCounts = std::array<std::int64_t, kPatterns>;
using PatternLaw = std::array<double, kPatterns>;

class AggregateStats {
public:
    /// Empirical statistics from pattern counts; rejects an empty sample.
    static AggregateStats from_counts(int window_t, const PatternCounts& counts);
    /// Population statistics from a probability law over the 32 patterns.
    static AggregateStats from_law(int window_t, const PatternLaw& law);

    int window_t() const { return window_t_; }
    /// Number of individuals; 0 for a population law.
    std::int64_t n() const { return n_; }
    bool is_population() const { return population_; }

    /// Weight of pattern p relative to the total (count / N, or probability).
    double frequency(unsigned p) const { return weight_[p] / total_; }
    const PatternCounts& counts() const { return counts_; }

    /// Average of kernel j (1..4) times the selector at window t - lag.
    /// lag = 1 supports only Minus / Plus (y_{t-4} is outside the window).
    double bar(KernelKind k, int j, Selector s, int lag = 0) const;
    double theta_bar(int j, Selector s, int lag = 0) const { return bar(KernelKind::Theta, j, s, lag); }
    double xi_bar(int j, Selector s, int lag = 0) const { return bar(KernelKind::Xi, j, s, lag); }

    /// Mean of kernel j with no selector.
    double unconditional_bar(KernelKind k, int j) const;

    bool operator==(const AggregateStats&) const = default;

private:
    AggregateStats() = default;
    void compute();

    int window_t_ = 0;
    std::int64_t n_ = 0;
    bool population_ = false;
    PatternCounts counts_{};
    std::array<double, kPatterns> weight_{};
    double total_ = 0.0;
    // [kernel][lag][j][selector]
    std::array<std::array<std::array<std::array<double, 4>, 4>, 2>, 2> bars_{};
};

/// Kernel component j at window `w` shifted back by `lag` periods.
int kernel_value(KernelKind k, int j, const Window5& w, int lag);
/// Selector at the window shifted back by `lag`; lag 1 rejects interaction selectors.
int selector_at(Selector s, const Window5& w, int lag);

PatternCounts window_counts(const PanelData& panel, int t, unsigned threads = 1);

/// Requires periods t-3..t+1; rejects an empty panel.
AggregateStats aggregate(const PanelData& panel, int t, unsigned threads = 1);

/// Pooled statistics of two disjoint samples at the same window.
AggregateStats merge(const AggregateStats& a, const AggregateStats& b);

}  // namespace panel_logit

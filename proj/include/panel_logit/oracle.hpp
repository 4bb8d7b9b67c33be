#pragma once

// Exact checks by enumeration: conditional path laws, population moments,
// closed-form identities between the kernel expansions and the scaled g/h
// forms, and ranks of moment-function value matrices.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "panel_logit/aggregation.hpp"
#include "panel_logit/estimators.hpp"
#include "panel_logit/kernels.hpp"
#include "panel_logit/model.hpp"

namespace panel_logit {

struct ConditioningState {
    double eta = 0.0;
    int y_init = 0;  // y_{t-2}
    int y_tm3 = 0;
};

/// Probabilities of (y_{t-1}, y_t, y_{t+1}), index y_{t-1} * 4 + y_t * 2 + y_{t+1}.
using PathLaw = std::array<double, 8>;

PathLaw path_law(const ModelSpec& spec, int t, const ConditioningState& state);
Window5 path_window(const ConditioningState& state, unsigned path);

using MomentFn = std::function<double(const Window5&)>;

double conditional_moment(const ModelSpec& spec, int t, const ConditioningState& state, const MomentFn& fn);

/// Finite support for the fixed effect.
struct EtaGrid {
    std::vector<double> points;
    std::vector<double> weights;

    static EtaGrid uniform(std::vector<double> points);
};

/// Law of y_{t-3}: a fixed marginal, or the model chain from period 1.
struct InitialLaw {
    enum class Kind { Marginal, ModelChain };
    Kind kind = Kind::Marginal;
    double p_one = 0.5;

    static InitialLaw marginal(double p) { return {Kind::Marginal, p}; }
    static InitialLaw model_chain() { return {Kind::ModelChain, 0.0}; }
};

PatternLaw pattern_law(const ModelSpec& spec, int t, const EtaGrid& grid, const InitialLaw& init = {});
AggregateStats population_stats(const ModelSpec& spec, int t, const EtaGrid& grid, const InitialLaw& init = {});
LinearSystem population_system(Family family, const ModelSpec& spec, int t, Variant variant, const EtaGrid& grid,
                               const InitialLaw& init = {});

/// Scaled g/h form of moment `which` (1..4) of family f, computed from hbar_u / hbar_upsilon.
double scaled_hbar_form(Family f, int which, const Window5& w, const PeriodParams& p);

/// Rank (singular values above 1e-10 of the largest) of the rows x 32 matrix
/// of moment values over all windows. Rows are 1-based stacked numbers.
int moment_rank(Family family, const ModelSpec& spec, int t, const std::vector<int>& rows);
Eigen::MatrixXd moment_value_matrix(Family family, const ModelSpec& spec, int t, const std::vector<int>& rows);

struct CheckResult {
    std::string name;
    bool passed = false;
    double max_violation = 0.0;
    std::string detail;
};

enum class VerifyLevel { Identities, Moments, Ranks, Population };

std::string_view verify_level_name(VerifyLevel l);
VerifyLevel parse_verify_level(std::string_view s);
std::vector<VerifyLevel> all_verify_levels();

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    int draws = 50;
    /// Flip the sign of the second kernel term in every expansion (mutation test).
    bool mutate_kernel_sign = false;
};

CheckResult check_identities(const VerifyOptions& opt = {});
CheckResult check_zero_mean(const VerifyOptions& opt = {});
CheckResult check_population_recovery(const VerifyOptions& opt = {});
CheckResult check_degeneracy_loci(const VerifyOptions& opt = {});
CheckResult check_three_period_underidentification(const VerifyOptions& opt = {});

std::vector<CheckResult> run_verify(const std::vector<VerifyLevel>& levels, const VerifyOptions& opt = {});

}  // namespace panel_logit

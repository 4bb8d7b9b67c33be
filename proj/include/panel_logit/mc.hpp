#pragma once

// Monte Carlo replications of simulate -> estimate -> recover.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "panel_logit/model.hpp"
#include "panel_logit/pipeline.hpp"

namespace panel_logit {

struct McConfig {
    explicit McConfig(ModelSpec s) : spec(std::move(s)) {}

    ModelSpec spec;
    DgpConfig cfg;
    int replications = 1;
    std::vector<EstimatorSpec> estimators;
    int discard_prefix = 0;
    unsigned threads = 1;  // 0 = default parallelism
    bool alpha_parameters = false;  // also summarize the transformed parameters

    /// Throws ConfigError on an invalid combination.
    void validate() const;
};

enum class FailureKind { None, Singular, NonpositiveAlpha, Other };

std::string_view failure_kind_name(FailureKind k);

struct ParamDraw {
    std::string name;
    double truth = 0.0;
    double estimate = 0.0;
    double se = 0.0;
};

/// Result of one estimator in one replication.
struct EstimatorOutcome {
    FailureKind failure = FailureKind::None;
    std::string message;
    std::vector<ParamDraw> params;
    std::optional<WaldResult> wald;
    /// The Wald test can fail on its own (e.g. a negative alpha outside the
    /// recovery set) without invalidating the parameter estimates.
    FailureKind wald_failure = FailureKind::None;
};

struct ParamSummary {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
};

struct EstimatorSummary {
    std::string label;
    int successes = 0;
    int singular_failures = 0;
    int nonpositive_failures = 0;
    int other_failures = 0;
    std::vector<ParamSummary> params;
    std::optional<double> wald_rejection_rate;  // at the 5% level, over computed tests
    int wald_df = 0;
    int wald_computed = 0;
    int wald_failures = 0;

    int failures() const { return singular_failures + nonpositive_failures + other_failures; }
    const ParamSummary& param(const std::string& name) const;
};

struct McSummary {
    int replications = 0;
    std::vector<EstimatorSummary> estimators;
};

/// outcomes[r][e] for replication r and estimator e.
using McOutcomes = std::vector<std::vector<EstimatorOutcome>>;
using ReplicationFn = std::function<std::vector<EstimatorOutcome>(std::uint32_t replication)>;

/// Summaries over successful replications; throws AllReplicationsFailed when
/// an estimator never succeeded.
McSummary summarize(const std::vector<std::string>& labels, const McOutcomes& outcomes);

/// Runs fn for every replication in parallel and summarizes in order.
McOutcomes run_replications(int replications, unsigned threads, const ReplicationFn& fn);

/// Estimates on replication r's panel; failures are captured, not thrown.
std::vector<EstimatorOutcome> estimate_replication(const McConfig& config, std::uint32_t replication);

/// Outcome of one estimator on one panel.
EstimatorOutcome estimator_outcome(const McConfig& config, const EstimatorSpec& est, const PanelData& panel);

McSummary run_mc(const McConfig& config, McOutcomes* outcomes = nullptr);

void write_summary_csv(std::ostream& out, const McSummary& s);
void write_summary_text(std::ostream& out, const McSummary& s);
void write_raw_csv(std::ostream& out, const std::vector<std::string>& labels, const McOutcomes& outcomes);

}  // namespace panel_logit

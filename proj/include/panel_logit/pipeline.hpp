#pragma once

// One estimation pass on a panel: aggregate, solve, recover, and optionally
// the two-step Delta TD_{t-1} and a Wald test.

#include <optional>
#include <string>

#include "panel_logit/estimators.hpp"
#include "panel_logit/model.hpp"
#include "panel_logit/recovery.hpp"

namespace panel_logit {

struct EstimatorSpec {
    Family family = Family::A;
    Variant variant = Variant::minus_3_7();
    int window = 7;
    bool two_step = false;
    bool wald = false;
    std::optional<RestrictionSet> wald_set;  // default by family

    /// e.g. "A minus-3-7 t=7".
    std::string label() const;
    /// Parses "A minus-3-7 7 [two-step] [wald[=set]]".
    static EstimatorSpec parse(const std::string& s);
    std::string to_string() const;
};

struct EstimationReport {
    EstimatorSpec request;
    double rcond = 0.0;
    std::vector<Diagnostic> guards;
    TransformedEstimate transformed;
    OriginalEstimate original;
    std::optional<TwoStepResult> two_step;
    std::optional<WaldResult> wald;
};

/// Throws the estimator errors unchanged.
EstimationReport run_estimation(const PanelData& panel, const EstimatorSpec& request, unsigned threads = 1);
EstimationReport run_estimation(const AggregateStats& stats, const EstimatorSpec& request);

}  // namespace panel_logit

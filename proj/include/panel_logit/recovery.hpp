#pragma once

// Original parameters, two-step Delta TD_{t-1} and Wald tests from the
// transformed estimates.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "panel_logit/estimators.hpp"

namespace panel_logit {

struct Param {
    double estimate = 0.0;
    double se = 0.0;
};

struct OriginalEstimate {
    Family family = Family::A;
    Variant variant;
    int window_t = 0;
    bool trend = false;

    Param gamma;
    Param dtd_t;    // Delta TD_t (dummies)
    Param dtd_tp1;  // Delta TD_{t+1} (dummies)
    Param phi_coef; // trend slope (family C)
    std::optional<Param> dtd_tm1;

    /// Names of the reported parameters in output order.
    std::vector<std::string> names() const;
    Param get(const std::string& name) const;
};

/// Jacobian of the original parameters with respect to the estimate's alpha
/// vector (rows follow OriginalEstimate::names() without dtd_tm1).
Eigen::MatrixXd recovery_jacobian(const TransformedEstimate& est);

/// Throws NonpositiveAlpha when a needed alpha estimate is <= 0.
OriginalEstimate recover_original(const TransformedEstimate& est);

struct TwoStepResult {
    Family family = Family::A;
    int window_t = 0;               // Delta TD is dated window_t - 1
    double ratio = 0.0;             // phi_{t-1} (A) or phi_{t-1}^{-1} (B)
    double denominator = 0.0;
    double var_ratio = 0.0;         // from the stacked system only
    double var_ratio_corrected = 0.0;
    Param dtd_tm1;                  // corrected standard error
};

/// var + 2 J [cov(ratio, a) cov(ratio, d)]' + J Cov(a, d) J'.
double corrected_variance(double var_ratio, const Eigen::Vector2d& cov_ratio_ad, const Eigen::Matrix2d& cov_ad,
                          const Eigen::Vector2d& jac);

/// Two-step estimate of Delta TD_{t-1}. The t-1 averages are taken from the
/// same window counts that built `system` (periods t-3..t), and `est` must
/// have been produced from `system`. Population systems get zero variances.
TwoStepResult two_step_dtd_tm1(const LinearSystem& system, const TransformedEstimate& est);

enum class RestrictionSet { Dummies, TrendC, TrendAB };

std::string_view restriction_set_name(RestrictionSet r);
RestrictionSet parse_restriction_set(std::string_view s);

struct Restrictions {
    std::vector<std::string> alphas;  // coordinate names
    Eigen::MatrixXd r;                // rows x alphas.size()
};

Restrictions restrictions(RestrictionSet set);
/// Default set for an estimate: TrendC for family C, Dummies otherwise.
RestrictionSet default_restriction_set(Family f);

struct WaldResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Tests R log(alpha) = 0 using the named alpha coordinates of `est`.
WaldResult wald_test(const TransformedEstimate& est, const Restrictions& r);
WaldResult wald_test(const TransformedEstimate& est, RestrictionSet set);

/// P(chi2_df > x).
double chi_square_upper_tail(double x, double df);

}  // namespace panel_logit

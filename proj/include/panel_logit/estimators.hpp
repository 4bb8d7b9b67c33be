#pragma once

// Just-identified linear estimators for the transformed parameters.
//
// Rows follow the Kronecker stacking (1, y_{t-3})' (x) (m1, m2, m3, m4)' for
// families A and B, and (m1..m4 at t, m1..m4 at t-1) for family C. Each row
// is the sample mean of one moment function, split into the part that does
// not involve alpha (moved to the left-hand side with a minus sign) and the
// alpha coefficients.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "panel_logit/aggregation.hpp"
#include "panel_logit/errors.hpp"
#include "panel_logit/kernels.hpp"

namespace panel_logit {

enum class VariantKind { MinusRow, Minus3And7, Minus1And5, Full };

struct Variant {
    VariantKind kind = VariantKind::Full;
    int row = 0;  // for MinusRow, 1..8

    static Variant minus_row(int r) { return {VariantKind::MinusRow, r}; }
    static Variant minus_3_7() { return {VariantKind::Minus3And7, 0}; }
    static Variant minus_1_5() { return {VariantKind::Minus1And5, 0}; }
    static Variant full() { return {VariantKind::Full, 0}; }

    /// "minus-r:<k>", "minus-3-7", "minus-1-5", "full".
    std::string name() const;
    static Variant parse(const std::string& s);

    bool operator==(const Variant&) const = default;
};

struct SystemRow {
    int moment = 0;           // 0..3 into moment_defs(family)
    bool interacted = false;  // multiplied by y_{t-3}
    int lag = 0;              // 1 for the t-1 block of family C
};

inline constexpr double kSingularRcond = 1e-10;

class LinearSystem {
public:
    LinearSystem(Family family, Variant variant, std::vector<SystemRow> rows, const AggregateStats& stats);

    Family family() const { return family_; }
    const Variant& variant() const { return variant_; }
    int window_t() const { return stats_.window_t(); }
    std::int64_t n() const { return stats_.n(); }
    const AggregateStats& stats() const { return stats_; }

    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::MatrixXd& x() const { return x_; }
    const std::vector<SystemRow>& rows() const { return rows_; }
    /// alpha indices of the columns, ascending.
    const std::vector<int>& columns() const { return columns_; }

    /// Position of the 1-based row number in the full stack that row k came from.
    int stacked_row_number(std::size_t k) const;
    std::vector<std::string> row_labels() const;
    std::vector<std::string> column_names() const;

    /// The i-th summands Y_i, X_i of an individual with the given window.
    void individual_terms(const Window5& w, Eigen::VectorXd& y, Eigen::MatrixXd& x) const;

private:
    Family family_;
    Variant variant_;
    std::vector<SystemRow> rows_;
    std::vector<int> columns_;
    AggregateStats stats_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd x_;
};

/// Families A and B. Variants: MinusRow(1..8), Minus3And7, Minus1And5, and
/// Full (8 x 7, not solvable).
LinearSystem build_system(Family family, const AggregateStats& stats, Variant variant);

/// Family C; the t-1 block is read from the same window counts.
LinearSystem build_system_c(const AggregateStats& stats_t);
/// Family C with separately aggregated t-1 statistics. Both must come from the
/// same panel: equal N and matching counts on the overlapping periods t-3..t.
LinearSystem build_system_c(const AggregateStats& stats_t, const AggregateStats& stats_tm1);

/// Any family; C requires Variant::full().
LinearSystem build_any(Family family, const AggregateStats& stats, Variant variant);

/// Exact 1-norm reciprocal condition number, 0 for singular input.
double reciprocal_condition(const Eigen::MatrixXd& m);

/// Sufficient uniqueness conditions available in closed form for the system's
/// variant (empty when none is known); each product equals det(X) up to sign.
std::vector<Diagnostic> uniqueness_guards(const LinearSystem& system);

/// Pivoted-LU solve; throws SingularSystem when rcond < 1e-10.
Eigen::VectorXd solve(const LinearSystem& system);

/// Residual covariance S = mean(V_i V_i') with V_i = Y_i - X_i alpha_hat.
/// `summands` provides the per-individual windows and must match the system.
Eigen::MatrixXd residual_covariance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat,
                                    const AggregateStats& summands);

/// (1/N) (X' W X)^{-1}, W = S^{-1}. Throws SingularWeight when S is singular.
Eigen::MatrixXd variance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat,
                         const AggregateStats& summands);
Eigen::MatrixXd variance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat);

struct TransformedEstimate {
    Family family = Family::A;
    Variant variant;
    int window_t = 0;
    std::int64_t n = 0;
    std::vector<std::string> names;
    Eigen::VectorXd alpha_hat;
    Eigen::MatrixXd vcov;

    bool has(const std::string& name) const;
    int index(const std::string& name) const;
    double value(const std::string& name) const { return alpha_hat(index(name)); }
    double se(const std::string& name) const;
};

/// Solve plus variance; a population system gets a zero vcov.
TransformedEstimate estimate(const LinearSystem& system);

}  // namespace panel_logit

#include "panel_logit/recovery.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <sstream>

namespace panel_logit {

std::vector<std::string> OriginalEstimate::names() const {
    std::vector<std::string> out;
    if (trend) {
        out = {"gamma", "phi"};
    } else {
        out = {"gamma", "dtd_t", "dtd_tp1"};
        if (dtd_tm1) out.insert(out.begin() + 1, "dtd_tm1");
    }
    return out;
}

Param OriginalEstimate::get(const std::string& name) const {
    if (name == "gamma") return gamma;
    if (name == "dtd_t") return dtd_t;
    if (name == "dtd_tp1") return dtd_tp1;
    if (name == "phi") return phi_coef;
    if (name == "dtd_tm1" && dtd_tm1) return *dtd_tm1;
    throw ConfigError("original estimate has no parameter '" + name + "'");
}

namespace {

double positive(const TransformedEstimate& est, const std::string& name) {
    const double v = est.value(name);
    if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "alpha_" << name << " estimate " << v << " is not positive (" << family_name(est.family) << " "
            << est.variant.name() << ", t=" << est.window_t << ")";
        throw NonpositiveAlpha(msg.str());
    }
    return v;
}

// Row of d(sum_k w_k log alpha_k)/d alpha.
void add_log(Eigen::MatrixXd& jac, int row, const TransformedEstimate& est, const std::string& name, double w) {
    jac(row, est.index(name)) += w / positive(est, name);
}

}  // namespace

Eigen::MatrixXd recovery_jacobian(const TransformedEstimate& est) {
    const auto p = static_cast<Eigen::Index>(est.names.size());
    if (est.family == Family::C) {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, p);
        add_log(jac, 0, est, "e", 1.0);
        add_log(jac, 0, est, "a", -1.0);
        add_log(jac, 1, est, "a", 1.0);
        return jac;
    }
    const double sign = est.family == Family::A ? 1.0 : -1.0;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, p);
    if (est.has("d")) {
        add_log(jac, 0, est, "d", 1.0);
        add_log(jac, 0, est, "a", -1.0);
    } else {
        add_log(jac, 0, est, "a", 1.0);
        add_log(jac, 0, est, "e", -1.0);
    }
    add_log(jac, 1, est, "a", sign);
    add_log(jac, 2, est, "b", -sign);
    return jac;
}

OriginalEstimate recover_original(const TransformedEstimate& est) {
    OriginalEstimate out;
    out.family = est.family;
    out.variant = est.variant;
    out.window_t = est.window_t;
    out.trend = est.family == Family::C;

    const Eigen::MatrixXd jac = recovery_jacobian(est);
    Eigen::VectorXd logs(est.alpha_hat.size());
    for (Eigen::Index k = 0; k < logs.size(); ++k)
        logs(k) = est.alpha_hat(k) > 0.0 ? std::log(est.alpha_hat(k)) : 0.0;
    // Each Jacobian row is w_k / alpha_k, so the parameter is sum_k (row_k * alpha_k) log alpha_k.
    const Eigen::VectorXd value = (jac.array().rowwise() * est.alpha_hat.transpose().array()).matrix() * logs;
    const Eigen::MatrixXd v = jac * est.vcov * jac.transpose();
    auto param = [&](int k) { return Param{value(k), std::sqrt(std::max(0.0, v(k, k)))}; };

    out.gamma = param(0);
    if (out.trend) {
        out.phi_coef = param(1);
    } else {
        out.dtd_t = param(1);
        out.dtd_tp1 = param(2);
    }
    return out;
}

double corrected_variance(double var_ratio, const Eigen::Vector2d& cov_ratio_ad, const Eigen::Matrix2d& cov_ad,
                          const Eigen::Vector2d& jac) {
    return var_ratio + 2.0 * jac.dot(cov_ratio_ad) + jac.dot(cov_ad * jac);
}

TwoStepResult two_step_dtd_tm1(const LinearSystem& system, const TransformedEstimate& est) {
    if (system.family() == Family::C) throw ConfigError("two-step Delta TD_{t-1} applies to families A and B");
    if (est.family != system.family() || !(est.variant == system.variant()) || est.window_t != system.window_t())
        throw ConfigError("two-step: estimate does not belong to the system");
    if (!est.has("a") || !est.has("d"))
        throw ConfigError("two-step Delta TD_{t-1} needs alpha_a and alpha_d; variant " + est.variant.name() +
                          " of family " + std::string(family_name(est.family)) + " does not estimate alpha_d");

    const bool fam_a = system.family() == Family::A;
    const KernelKind kind = fam_a ? KernelKind::Theta : KernelKind::Xi;
    const Selector sel = fam_a ? Selector::Minus : Selector::Plus;
    const auto& st = system.stats();
    const double a = est.value("a");
    const double d = est.value("d");
    const double k1 = st.bar(kind, 1, sel, 1), k2 = st.bar(kind, 2, sel, 1);
    const double k3 = st.bar(kind, 3, sel, 1), k4 = st.bar(kind, 4, sel, 1);
    const double num = a * k1 + k2;
    const double den = a * a * k3 + d * k4;
    if (den == 0.0 || !std::isfinite(den))
        throw ZeroDenominator("two-step: denominator of the t-1 ratio is zero");
    const double ratio = -num / den;

    // Stacked system: first row is the t-1 moment with alpha plugged in.
    const auto m = static_cast<Eigen::Index>(system.rows().size());
    const auto p = static_cast<Eigen::Index>(system.columns().size());
    Eigen::MatrixXd xd = Eigen::MatrixXd::Zero(m + 1, p + 1);
    xd(0, 0) = den;
    xd.bottomRightCorner(m, p) = system.x();
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(p + 1, p + 1);
    if (!st.is_population()) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m + 1, m + 1);
        Eigen::VectorXd yi, v(m + 1);
        Eigen::MatrixXd xi;
        for (unsigned pat = 0; pat < kPatterns; ++pat) {
            const double f = st.frequency(pat);
            if (f == 0.0) continue;
            const Window5 w = Window5::from_pattern(pat);
            system.individual_terms(w, yi, xi);
            const int z = selector_at(sel, w, 1);
            const double ni = z * (a * kernel_value(kind, 1, w, 1) + kernel_value(kind, 2, w, 1));
            const double di = z * (a * a * kernel_value(kind, 3, w, 1) + d * kernel_value(kind, 4, w, 1));
            v(0) = -ni - di * ratio;
            v.tail(m) = yi - xi * est.alpha_hat;
            s.noalias() += f * v * v.transpose();
        }
        if (!(reciprocal_condition(s) >= kSingularRcond))
            throw SingularWeight("two-step: stacked residual covariance is singular");
        const Eigen::MatrixXd w = s.ldlt().solve(Eigen::MatrixXd::Identity(m + 1, m + 1));
        const Eigen::MatrixXd info = xd.transpose() * w * xd;
        if (!(reciprocal_condition(info) >= kSingularRcond)) throw SingularWeight("two-step: X' W X is singular");
        var = info.inverse() / static_cast<double>(system.n());
        var = 0.5 * (var + var.transpose());
    }

    const int ia = est.index("a") + 1, id = est.index("d") + 1;
    const Eigen::Vector2d jac(-(k1 + 2.0 * ratio * a * k3) / den, -ratio * k4 / den);
    const Eigen::Vector2d cross(var(0, ia), var(0, id));
    Eigen::Matrix2d cov_ad;
    cov_ad << var(ia, ia), var(ia, id), var(id, ia), var(id, id);

    TwoStepResult out;
    out.family = system.family();
    out.window_t = system.window_t();
    out.ratio = ratio;
    out.denominator = den;
    out.var_ratio = var(0, 0);
    out.var_ratio_corrected = corrected_variance(var(0, 0), cross, cov_ad, jac);
    if (!(ratio > 0.0)) {
        std::ostringstream msg;
        msg << "two-step: estimated " << (fam_a ? "phi_{t-1}" : "phi_{t-1}^{-1}") << " = " << ratio
            << " is not positive";
        throw NonpositivePhiHat(msg.str());
    }
    const double dtd = fam_a ? std::log(ratio) : -std::log(ratio);
    out.dtd_tm1 = {dtd, std::sqrt(std::max(0.0, out.var_ratio_corrected)) / ratio};
    return out;
}

std::string_view restriction_set_name(RestrictionSet r) {
    switch (r) {
        case RestrictionSet::Dummies: return "dummies";
        case RestrictionSet::TrendC: return "trend-c";
        case RestrictionSet::TrendAB: return "trend-ab";
    }
    return "?";
}

RestrictionSet parse_restriction_set(std::string_view s) {
    if (s == "dummies") return RestrictionSet::Dummies;
    if (s == "trend-c") return RestrictionSet::TrendC;
    if (s == "trend-ab") return RestrictionSet::TrendAB;
    throw ConfigError("unknown restriction set '" + std::string(s) + "' (expected dummies, trend-c or trend-ab)");
}

Restrictions restrictions(RestrictionSet set) {
    Restrictions out;
    switch (set) {
        case RestrictionSet::Dummies:
            out.alphas = {"a", "b", "c", "d", "f", "g"};
            out.r.resize(3, 6);
            out.r << 1, -1, -1, 0, 0, 0,
                     1, 1, 0, -1, -1, 0,
                     2, -1, 0, -1, 0, -1;
            break;
        case RestrictionSet::TrendC:
            out.alphas = {"a", "b", "c", "d", "e", "f", "g", "h"};
            out.r.resize(6, 8);
            out.r << -1, -1, 0, 0, 0, 0, 0, 0,
                     2, 0, -1, 0, 0, 0, 0, 0,
                     -2, 0, 0, -1, 0, 0, 0, 0,
                     2, 0, 0, 0, -1, -1, 0, 0,
                     -2, 0, 0, 0, 1, 0, -1, 0,
                     0, 0, 0, 0, -1, 0, 0, -1;
            break;
        case RestrictionSet::TrendAB:
            out.alphas = {"a", "b", "c", "d", "f", "g"};
            out.r.resize(4, 6);
            out.r << -1, -1, 0, 0, 0, 0,
                     2, 0, -1, 0, 0, 0,
                     0, 0, 0, -1, -1, 0,
                     3, 0, 0, -1, 0, -1;
            break;
    }
    return out;
}

RestrictionSet default_restriction_set(Family f) {
    return f == Family::C ? RestrictionSet::TrendC : RestrictionSet::Dummies;
}

WaldResult wald_test(const TransformedEstimate& est, const Restrictions& r) {
    const auto q = r.r.rows();
    const auto k = static_cast<Eigen::Index>(r.alphas.size());
    if (r.r.cols() != k) throw ConfigError("wald: restriction matrix does not match its coordinates");
    Eigen::VectorXd ell(k);
    Eigen::MatrixXd vl(k, k);
    std::vector<int> idx;
    for (Eigen::Index j = 0; j < k; ++j) {
        const std::string& name = r.alphas[static_cast<std::size_t>(j)];
        if (!est.has(name))
            throw ConfigError("wald: estimate " + std::string(family_name(est.family)) + " " + est.variant.name() +
                              " has no alpha_" + name);
        idx.push_back(est.index(name));
        ell(j) = std::log(positive(est, name));
    }
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            vl(i, j) = est.vcov(idx[i], idx[j]) / (est.alpha_hat(idx[i]) * est.alpha_hat(idx[j]));
    const Eigen::VectorXd rl = r.r * ell;
    const Eigen::MatrixXd c = r.r * vl * r.r.transpose();
    if (!(reciprocal_condition(c) >= kSingularRcond))
        throw SingularRestrictionCovariance("wald: covariance of the restrictions is singular");
    WaldResult out;
    out.statistic = std::max(0.0, rl.dot(c.ldlt().solve(rl)));
    out.df = static_cast<int>(q);
    out.p_value = chi_square_upper_tail(out.statistic, out.df);
    return out;
}

WaldResult wald_test(const TransformedEstimate& est, RestrictionSet set) {
    return wald_test(est, restrictions(set));
}

double chi_square_upper_tail(double x, double df) {
    if (!(df > 0.0)) throw ConfigError("chi-square: degrees of freedom must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace panel_logit

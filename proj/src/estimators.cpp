#include "panel_logit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace panel_logit {

std::string Variant::name() const {
    switch (kind) {
        case VariantKind::MinusRow: return "minus-r:" + std::to_string(row);
        case VariantKind::Minus3And7: return "minus-3-7";
        case VariantKind::Minus1And5: return "minus-1-5";
        case VariantKind::Full: return "full";
    }
    return "?";
}

Variant Variant::parse(const std::string& s) {
    if (s == "minus-3-7") return minus_3_7();
    if (s == "minus-1-5") return minus_1_5();
    if (s == "full") return full();
    const std::string prefix = "minus-r:";
    if (s.rfind(prefix, 0) == 0) {
        const std::string k = s.substr(prefix.size());
        if (k.size() == 1 && k[0] >= '1' && k[0] <= '8') return minus_row(k[0] - '0');
    }
    throw ConfigError("unknown variant '" + s + "' (expected minus-r:<1..8>, minus-3-7, minus-1-5 or full)");
}

namespace {

Selector row_selector(const MomentDef& def, const SystemRow& row) {
    const bool plus = def.selector == Lag2Selector::One;
    if (row.interacted) return plus ? Selector::PlusPlus : Selector::MinusPlus;
    return plus ? Selector::Plus : Selector::Minus;
}

double norm1(const Eigen::MatrixXd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

LinearSystem::LinearSystem(Family family, Variant variant, std::vector<SystemRow> rows, const AggregateStats& stats)
    : family_(family), variant_(variant), rows_(std::move(rows)), stats_(stats) {
    const auto defs = moment_defs(family_);
    std::set<int> present;
    for (const auto& r : rows_)
        for (int c : defs[static_cast<std::size_t>(r.moment)].coef)
            if (c != kConstantCoef) present.insert(c);
    columns_.assign(present.begin(), present.end());

    const auto m = static_cast<Eigen::Index>(rows_.size());
    const auto p = static_cast<Eigen::Index>(columns_.size());
    y_ = Eigen::VectorXd::Zero(m);
    x_ = Eigen::MatrixXd::Zero(m, p);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& r = rows_[static_cast<std::size_t>(k)];
        const auto& def = defs[static_cast<std::size_t>(r.moment)];
        const Selector sel = row_selector(def, r);
        for (int j = 1; j <= 4; ++j) {
            const double b = stats_.bar(def.kernel, j, sel, r.lag);
            const int alpha = def.coef[static_cast<std::size_t>(j - 1)];
            if (alpha == kConstantCoef) {
                y_(k) = -b;
            } else {
                const auto col = std::find(columns_.begin(), columns_.end(), alpha) - columns_.begin();
                x_(k, col) = b;
            }
        }
    }
}

int LinearSystem::stacked_row_number(std::size_t k) const {
    const auto& r = rows_[k];
    return r.moment + 1 + ((r.interacted || r.lag == 1) ? 4 : 0);
}

std::vector<std::string> LinearSystem::row_labels() const {
    const auto defs = moment_defs(family_);
    std::vector<std::string> out;
    for (const auto& r : rows_) {
        std::string label(defs[static_cast<std::size_t>(r.moment)].name);
        if (r.lag == 1) label += "[t-1]";
        if (r.interacted) label = "y_{t-3}*" + label;
        out.push_back(label);
    }
    return out;
}

std::vector<std::string> LinearSystem::column_names() const {
    const auto names = alpha_names(family_);
    std::vector<std::string> out;
    for (int c : columns_) out.emplace_back(names[static_cast<std::size_t>(c)]);
    return out;
}

void LinearSystem::individual_terms(const Window5& w, Eigen::VectorXd& y, Eigen::MatrixXd& x) const {
    const auto defs = moment_defs(family_);
    const auto m = static_cast<Eigen::Index>(rows_.size());
    y = Eigen::VectorXd::Zero(m);
    x = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(columns_.size()));
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& r = rows_[static_cast<std::size_t>(k)];
        const auto& def = defs[static_cast<std::size_t>(r.moment)];
        const int sel = selector_at(row_selector(def, r), w, r.lag);
        if (sel == 0) continue;
        for (int j = 1; j <= 4; ++j) {
            const int v = kernel_value(def.kernel, j, w, r.lag);
            if (v == 0) continue;
            const int alpha = def.coef[static_cast<std::size_t>(j - 1)];
            if (alpha == kConstantCoef) {
                y(k) = -v;
            } else {
                const auto col = std::find(columns_.begin(), columns_.end(), alpha) - columns_.begin();
                x(k, col) = v;
            }
        }
    }
}

LinearSystem build_system(Family family, const AggregateStats& stats, Variant variant) {
    if (family == Family::C)
        throw ConfigError("build_system handles families A and B; use build_system_c for C");
    std::set<int> removed;
    switch (variant.kind) {
        case VariantKind::MinusRow:
            if (variant.row < 1 || variant.row > 8) throw ConfigError("minus-r row must be in 1..8");
            removed = {variant.row};
            break;
        case VariantKind::Minus3And7: removed = {3, 7}; break;
        case VariantKind::Minus1And5: removed = {1, 5}; break;
        case VariantKind::Full: break;
    }
    std::vector<SystemRow> rows;
    for (int r = 1; r <= 8; ++r)
        if (!removed.contains(r)) rows.push_back({(r - 1) % 4, r > 4, 0});
    return LinearSystem(family, variant, std::move(rows), stats);
}

LinearSystem build_system_c(const AggregateStats& stats_t) {
    std::vector<SystemRow> rows;
    for (int lag = 0; lag < 2; ++lag)
        for (int m = 0; m < 4; ++m) rows.push_back({m, false, lag});
    return LinearSystem(Family::C, Variant::full(), std::move(rows), stats_t);
}

LinearSystem build_system_c(const AggregateStats& stats_t, const AggregateStats& stats_tm1) {
    if (stats_tm1.window_t() != stats_t.window_t() - 1)
        throw ConfigError("build_system_c: second statistics must be at window t-1");
    if (stats_t.n() != stats_tm1.n() || stats_t.is_population() != stats_tm1.is_population())
        throw ConfigError("build_system_c: statistics come from samples of different size");
    if (!stats_t.is_population()) {
        // Periods t-3..t are the low four bits of the t-1 pattern and the high four of the t pattern.
        std::array<std::int64_t, 16> from_t{}, from_tm1{};
        for (unsigned p = 0; p < kPatterns; ++p) {
            from_t[p >> 1] += stats_t.counts()[p];
            from_tm1[p & 15u] += stats_tm1.counts()[p];
        }
        if (from_t != from_tm1)
            throw ConfigError("build_system_c: windows t and t-1 were not aggregated from the same panel");
    } else {
        for (int kind = 0; kind < 2; ++kind)
            for (int j = 1; j <= 4; ++j)
                for (Selector s : {Selector::Minus, Selector::Plus}) {
                    const auto k = static_cast<KernelKind>(kind);
                    if (std::abs(stats_t.bar(k, j, s, 1) - stats_tm1.bar(k, j, s, 0)) > 1e-12)
                        throw ConfigError("build_system_c: population laws at t and t-1 disagree");
                }
    }
    return build_system_c(stats_t);
}

LinearSystem build_any(Family family, const AggregateStats& stats, Variant variant) {
    if (family == Family::C) {
        if (variant.kind != VariantKind::Full) throw ConfigError("family C supports only the full variant");
        return build_system_c(stats);
    }
    return build_system(family, stats, variant);
}

double reciprocal_condition(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols() || !m.allFinite()) return 0.0;
    const double a = norm1(m);
    if (a == 0.0) return 0.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) return 0.0;
    const Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) return 0.0;
    return 1.0 / (a * norm1(inv));
}

std::vector<Diagnostic> uniqueness_guards(const LinearSystem& system) {
    const auto& st = system.stats();
    using S = Selector;
    auto th = [&](int j, S s, int lag = 0) { return st.theta_bar(j, s, lag); };
    auto xi = [&](int j, S s, int lag = 0) { return st.xi_bar(j, s, lag); };
    const auto& v = system.variant();
    std::vector<Diagnostic> out;

    if (system.family() == Family::A &&
        (v.kind == VariantKind::Minus3And7 || (v.kind == VariantKind::MinusRow && v.row == 3))) {
        const double lambda = th(3, S::PlusPlus) * th(4, S::MinusPlus) * xi(3, S::MinusPlus);
        const double delta =
            (th(2, S::Minus) - th(2, S::MinusPlus) * th(4, S::Minus) / th(4, S::MinusPlus)) *
                (th(4, S::Plus) - th(4, S::PlusPlus) * th(3, S::Plus) / th(3, S::PlusPlus)) *
                (xi(2, S::Minus) - xi(2, S::MinusPlus) * xi(3, S::Minus) / xi(3, S::MinusPlus)) +
            (th(2, S::Plus) - th(2, S::PlusPlus) * th(3, S::Plus) / th(3, S::PlusPlus)) *
                (th(3, S::Minus) - th(3, S::MinusPlus) * th(4, S::Minus) / th(4, S::MinusPlus)) *
                (xi(1, S::Minus) - xi(1, S::MinusPlus) * xi(3, S::Minus) / xi(3, S::MinusPlus));
        out.push_back({"Lambda_A", lambda});
        out.push_back({"Delta_A", delta});
        if (v.kind == VariantKind::MinusRow) out.push_back({"Xi1++", xi(1, S::PlusPlus)});
    } else if (system.family() == Family::B &&
               (v.kind == VariantKind::Minus1And5 || (v.kind == VariantKind::MinusRow && v.row == 1))) {
        const double lambda = th(3, S::PlusPlus) * xi(3, S::MinusPlus) * xi(4, S::PlusPlus);
        const double delta =
            (th(1, S::Plus) - th(1, S::PlusPlus) * th(3, S::Plus) / th(3, S::PlusPlus)) *
                (xi(2, S::Minus) - xi(2, S::MinusPlus) * xi(3, S::Minus) / xi(3, S::MinusPlus)) *
                (xi(3, S::Plus) - xi(3, S::PlusPlus) * xi(4, S::Plus) / xi(4, S::PlusPlus)) +
            (th(2, S::Plus) - th(2, S::PlusPlus) * th(3, S::Plus) / th(3, S::PlusPlus)) *
                (xi(4, S::Minus) - xi(4, S::MinusPlus) * xi(3, S::Minus) / xi(3, S::MinusPlus)) *
                (xi(2, S::Plus) - xi(2, S::PlusPlus) * xi(4, S::Plus) / xi(4, S::PlusPlus));
        out.push_back({"Lambda_B", lambda});
        out.push_back({"Delta_B", delta});
        if (v.kind == VariantKind::MinusRow) out.push_back({"Theta1-+", th(1, S::MinusPlus)});
    } else if (system.family() == Family::C) {
        const double lagged = th(3, S::Plus, 1) * th(4, S::Minus, 1) * xi(3, S::Minus, 1) * xi(4, S::Plus, 1);
        auto d = [](double now, double before, double num_now, double num_before) {
            return now - before * num_now / num_before;
        };
        const double cross =
            d(th(1, S::Plus), th(1, S::Plus, 1), th(3, S::Plus), th(3, S::Plus, 1)) *
                d(th(3, S::Minus), th(3, S::Minus, 1), th(4, S::Minus), th(4, S::Minus, 1)) *
                d(xi(1, S::Minus), xi(1, S::Minus, 1), xi(3, S::Minus), xi(3, S::Minus, 1)) *
                d(xi(3, S::Plus), xi(3, S::Plus, 1), xi(4, S::Plus), xi(4, S::Plus, 1)) -
            d(th(2, S::Plus), th(2, S::Plus, 1), th(3, S::Plus), th(3, S::Plus, 1)) *
                d(th(2, S::Minus), th(2, S::Minus, 1), th(4, S::Minus), th(4, S::Minus, 1)) *
                d(xi(2, S::Minus), xi(2, S::Minus, 1), xi(3, S::Minus), xi(3, S::Minus, 1)) *
                d(xi(2, S::Plus), xi(2, S::Plus, 1), xi(4, S::Plus), xi(4, S::Plus, 1));
        out.push_back({"C_lagged_product", lagged});
        out.push_back({"C_cross_determinant", cross});
    }
    return out;
}

Eigen::VectorXd solve(const LinearSystem& system) {
    const auto& x = system.x();
    if (x.rows() != x.cols())
        throw ConfigError("solve: " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          " system is not just-identified; choose a minus-* variant");
    const double rc = reciprocal_condition(x);
    if (!(rc >= kSingularRcond)) {
        auto guards = uniqueness_guards(system);
        std::ostringstream msg;
        msg << "singular system for " << family_name(system.family()) << " " << system.variant().name()
            << " at t=" << system.window_t() << " (rcond=" << rc << ")";
        for (const auto& g : guards) msg << "; " << g.name << "=" << g.value;
        guards.push_back({"rcond", rc});
        throw SingularSystem(msg.str(), rc, std::move(guards));
    }
    return x.partialPivLu().solve(system.y());
}

Eigen::MatrixXd residual_covariance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat,
                                    const AggregateStats& summands) {
    if (summands.window_t() != system.window_t() || summands.n() != system.n())
        throw ConfigError("variance: summands do not match the system's window or sample");
    const auto m = static_cast<Eigen::Index>(system.rows().size());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd yi;
    Eigen::MatrixXd xi;
    for (unsigned p = 0; p < kPatterns; ++p) {
        const double f = summands.frequency(p);
        if (f == 0.0) continue;
        system.individual_terms(Window5::from_pattern(p), yi, xi);
        const Eigen::VectorXd v = yi - xi * alpha_hat;
        s.noalias() += f * v * v.transpose();
    }
    return s;
}

Eigen::MatrixXd variance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat,
                         const AggregateStats& summands) {
    if (summands.is_population() || summands.n() <= 0)
        throw ConfigError("variance: needs a sample, not a population law");
    const Eigen::MatrixXd s = residual_covariance(system, alpha_hat, summands);
    if (!(reciprocal_condition(s) >= kSingularRcond))
        throw SingularWeight("variance: residual covariance is singular for " +
                             std::string(family_name(system.family())) + " " + system.variant().name());
    const Eigen::MatrixXd w = s.ldlt().solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
    const Eigen::MatrixXd info = system.x().transpose() * w * system.x();
    if (!(reciprocal_condition(info) >= kSingularRcond))
        throw SingularWeight("variance: X' W X is singular");
    Eigen::MatrixXd vcov = info.inverse() / static_cast<double>(system.n());
    return 0.5 * (vcov + vcov.transpose());
}

Eigen::MatrixXd variance(const LinearSystem& system, const Eigen::VectorXd& alpha_hat) {
    return variance(system, alpha_hat, system.stats());
}

bool TransformedEstimate::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

int TransformedEstimate::index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw ConfigError("estimate " + std::string(family_name(family)) + " " + variant.name() +
                          " has no parameter alpha_" + name);
    return static_cast<int>(it - names.begin());
}

double TransformedEstimate::se(const std::string& name) const {
    const int k = index(name);
    return std::sqrt(std::max(0.0, vcov(k, k)));
}

TransformedEstimate estimate(const LinearSystem& system) {
    TransformedEstimate est;
    est.family = system.family();
    est.variant = system.variant();
    est.window_t = system.window_t();
    est.n = system.n();
    est.names = system.column_names();
    est.alpha_hat = solve(system);
    const auto p = est.alpha_hat.size();
    est.vcov = system.stats().is_population() ? Eigen::MatrixXd::Zero(p, p) : variance(system, est.alpha_hat);
    return est;
}

}  // namespace panel_logit

#include "panel_logit/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "panel_logit/errors.hpp"

namespace panel_logit {

KernelVector theta_kernels(const Window5& w) {
    const int y1 = w.y_tm1, y0 = w.y_t, yp = w.y_tp1;
    const int switch_in = y0 + (1 - y0) * yp;
    return {(1 - y1) * switch_in, -(1 - y1) * (1 - y0) * yp, y1 * (switch_in - y1), -y1 * (1 - y0) * yp};
}

KernelVector xi_kernels(const Window5& w) {
    const int y1 = w.y_tm1, y0 = w.y_t, yp = w.y_tp1;
    return {y1 * (y0 * yp - y1), y1 * y0 * (1 - yp), (1 - y1) * y0 * yp, (1 - y1) * y0 * (1 - yp)};
}

PeriodParams period_params(const ModelSpec& spec, int t) {
    return {spec.delta(), spec.phi(t), spec.phi(t + 1)};
}

GhCoefficients gh_coefficients(const PeriodParams& p) {
    const double d1 = p.delta + 1.0;
    const double pp = p.phi_t * p.phi_tp1;
    const double ipp = 1.0 / pp;
    return {(pp - d1) / (pp + d1), (pp - 1.0) / (pp + 1.0), (ipp - d1) / (ipp + d1), (ipp - 1.0) / (ipp + 1.0)};
}

namespace {

void require_positive(const PeriodParams& p) {
    if (!(p.phi_t > 0.0) || !(p.phi_tp1 > 0.0))
        throw ConfigError("moment function: phi arguments must be positive");
    if (!(p.delta > -1.0)) throw ConfigError("moment function: delta must exceed -1");
}

}  // namespace

double u_minus(const Window5& w, const PeriodParams& p) {
    const double y1 = w.y_tm1, y0 = w.y_t, yp = w.y_tp1;
    const double late = (1 - y0) * yp;
    return y0 + late - late / p.phi_tp1 - p.delta * y1 * late / p.phi_tp1;
}

double upsilon_minus(const Window5& w, const PeriodParams& p) {
    const double y1 = w.y_tm1, y0 = w.y_t, yp = w.y_tp1;
    const double stay = y0 * (1 - yp);
    return y0 * yp + stay * p.phi_tp1 + p.delta * (1 - y1) * stay * p.phi_tp1;
}

double hbar_u(const Window5& w, const PeriodParams& p) {
    require_positive(p);
    const auto gh = gh_coefficients(p);
    const double y2 = w.y_tm2, y1 = w.y_tm1;
    const double u = u_minus(w, p);
    return u - y1 + ((gh.psi - gh.phi_big) * y2 + gh.phi_big) * ((u - y1) - 2.0 * u * (1 - y1));
}

double hbar_upsilon(const Window5& w, const PeriodParams& p) {
    require_positive(p);
    const auto gh = gh_coefficients(p);
    const double y2 = w.y_tm2, y1 = w.y_tm1;
    const double v = upsilon_minus(w, p) - y1;
    return v + ((gh.psi_star - gh.phi_big_star) * (1 - y2) + gh.phi_big_star) * (v - 2.0 * v * y1);
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::A: return "A";
        case Family::B: return "B";
        case Family::C: return "C";
    }
    return "?";
}

Family parse_family(std::string_view s) {
    if (s == "A" || s == "a") return Family::A;
    if (s == "B" || s == "b") return Family::B;
    if (s == "C" || s == "c") return Family::C;
    throw ConfigError("unknown estimator family '" + std::string(s) + "' (expected A, B or C)");
}

namespace {

constexpr int kA = 0, kB = 1, kC = 2, kD = 3, kE = 4, kF = 5, kG = 6, kH = 7;
constexpr int k1 = kConstantCoef;

constexpr std::array<MomentDef, 4> kFamilyA{{
    {"iota", KernelKind::Theta, Lag2Selector::Zero, {k1, kB, kC, kD}},
    {"iota*", KernelKind::Theta, Lag2Selector::One, {k1, kB, kG, kA}},
    {"kappa", KernelKind::Xi, Lag2Selector::One, {kE, kG, kF, k1}},
    {"kappa*", KernelKind::Xi, Lag2Selector::Zero, {kA, kC, kF, k1}},
}};

constexpr std::array<MomentDef, 4> kFamilyB{{
    {"lambda", KernelKind::Theta, Lag2Selector::Zero, {kE, kG, kF, k1}},
    {"lambda*", KernelKind::Theta, Lag2Selector::One, {kA, kC, kF, k1}},
    {"mu", KernelKind::Xi, Lag2Selector::One, {k1, kB, kC, kD}},
    {"mu*", KernelKind::Xi, Lag2Selector::Zero, {k1, kB, kG, kA}},
}};

constexpr std::array<MomentDef, 4> kFamilyC{{
    {"rho", KernelKind::Theta, Lag2Selector::Zero, {k1, kB, kC, kE}},
    {"rho*", KernelKind::Theta, Lag2Selector::One, {kB, kD, kF, k1}},
    {"varsigma", KernelKind::Xi, Lag2Selector::One, {k1, kA, kD, kG}},
    {"varsigma*", KernelKind::Xi, Lag2Selector::Zero, {kA, kC, kH, k1}},
}};

constexpr std::array<std::string_view, 8> kAlphaNames{"a", "b", "c", "d", "e", "f", "g", "h"};

}  // namespace

std::span<const MomentDef, 4> moment_defs(Family f) {
    switch (f) {
        case Family::A: return kFamilyA;
        case Family::B: return kFamilyB;
        case Family::C: return kFamilyC;
    }
    return kFamilyA;
}

int alpha_count(Family f) { return f == Family::C ? 8 : 7; }

std::span<const std::string_view> alpha_names(Family f) {
    return std::span<const std::string_view>(kAlphaNames.data(), static_cast<std::size_t>(alpha_count(f)));
}

int alpha_index(Family f, std::string_view name) {
    const auto names = alpha_names(f);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw ConfigError("family " + std::string(family_name(f)) + " has no parameter alpha_" + std::string(name));
    return static_cast<int>(it - names.begin());
}

std::vector<double> alpha_from_params(Family f, const PeriodParams& p) {
    const double d1 = 1.0 + p.delta;
    const double pt = p.phi_t, pn = p.phi_tp1;
    switch (f) {
        case Family::A:
            return {pt, 1.0 / pn, pt * pn, pt * d1, pt / d1, 1.0 / (pn * d1), pt * pn / d1};
        case Family::B:
            return {1.0 / pt, pn, 1.0 / (pt * pn), d1 / pt, 1.0 / (pt * d1), pn / d1, 1.0 / (pt * pn * d1)};
        case Family::C:
            return {pt, 1.0 / pt, pt * pt, 1.0 / (pt * pt), pt * d1, pt / d1, d1 / pt, 1.0 / (pt * d1)};
    }
    return {};
}

std::vector<double> alpha_from_spec(Family f, const ModelSpec& spec, int t) {
    if (f == Family::C && !spec.is_trend())
        throw ConfigError("family C parameters are defined for the time-trend model only");
    return alpha_from_params(f, period_params(spec, t));
}

double evaluate_moment(const MomentDef& def, const Window5& w, std::span<const double> alpha) {
    const int sel = def.selector == Lag2Selector::One ? w.y_tm2 : 1 - w.y_tm2;
    if (sel == 0) return 0.0;
    const KernelVector k = def.kernel == KernelKind::Theta ? theta_kernels(w) : xi_kernels(w);
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        if (k[j] == 0) continue;
        const double c = def.coef[j] == kConstantCoef ? 1.0 : alpha[static_cast<std::size_t>(def.coef[j])];
        sum += c * k[j];
    }
    return sum;
}

double transformed_moment_row(Family f, int which, const Window5& w, std::span<const double> alpha) {
    if (which < 1 || which > 4) throw ConfigError("moment index must be in 1..4");
    if (static_cast<int>(alpha.size()) != alpha_count(f))
        throw ConfigError("alpha vector has the wrong length for family " + std::string(family_name(f)));
    return evaluate_moment(moment_defs(f)[static_cast<std::size_t>(which - 1)], w, alpha);
}

}  // namespace panel_logit

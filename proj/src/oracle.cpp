#include "panel_logit/oracle.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "panel_logit/recovery.hpp"
#include "panel_logit/rng.hpp"

namespace panel_logit {

namespace {

double p_one(const ModelSpec& spec, double eta, int y_prev, int period) {
    return logit_prob(eta, spec.gamma(), y_prev, spec.effect(period));
}

double bernoulli(double p, int y) { return y ? p : 1.0 - p; }

double rel_gap(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

// Kernel expansion of a moment; the mutation flips the second kernel term.
double expansion(Family f, int which, const Window5& w, std::span<const double> alpha, bool mutate) {
    double v = transformed_moment_row(f, which, w, alpha);
    if (!mutate) return v;
    const MomentDef& def = moment_defs(f)[static_cast<std::size_t>(which - 1)];
    const int sel = def.selector == Lag2Selector::One ? w.y_tm2 : 1 - w.y_tm2;
    const KernelVector k = def.kernel == KernelKind::Theta ? theta_kernels(w) : xi_kernels(w);
    const double c = def.coef[1] == kConstantCoef ? 1.0 : alpha[static_cast<std::size_t>(def.coef[1])];
    return v - 2.0 * sel * c * k[1];
}

TimeDummies dummies_at(int t, double gamma, double dtd_tm1, double dtd_t, double dtd_tp1) {
    TimeDummies m;
    m.gamma = gamma;
    std::vector<double>& td = m.td;
    for (int s = 1; s <= t - 2; ++s) td.push_back(s % 2 ? 0.1 : -0.1);
    td.push_back(td.back() + dtd_tm1);
    td.push_back(td.back() + dtd_t);
    td.push_back(td.back() + dtd_tp1);
    return m;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

}  // namespace

PathLaw path_law(const ModelSpec& spec, int t, const ConditioningState& state) {
    PathLaw law{};
    for (unsigned path = 0; path < 8; ++path) {
        const int y1 = static_cast<int>(path >> 2 & 1u), y0 = static_cast<int>(path >> 1 & 1u),
                  yp = static_cast<int>(path & 1u);
        law[path] = bernoulli(p_one(spec, state.eta, state.y_init, t - 1), y1) *
                    bernoulli(p_one(spec, state.eta, y1, t), y0) * bernoulli(p_one(spec, state.eta, y0, t + 1), yp);
    }
    return law;
}

Window5 path_window(const ConditioningState& state, unsigned path) {
    return {state.y_tm3, state.y_init, static_cast<int>(path >> 2 & 1u), static_cast<int>(path >> 1 & 1u),
            static_cast<int>(path & 1u)};
}

double conditional_moment(const ModelSpec& spec, int t, const ConditioningState& state, const MomentFn& fn) {
    const PathLaw law = path_law(spec, t, state);
    double sum = 0.0;
    for (unsigned path = 0; path < 8; ++path) sum += law[path] * fn(path_window(state, path));
    return sum;
}

EtaGrid EtaGrid::uniform(std::vector<double> points) {
    EtaGrid g;
    g.weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    g.points = std::move(points);
    return g;
}

PatternLaw pattern_law(const ModelSpec& spec, int t, const EtaGrid& grid, const InitialLaw& init) {
    if (grid.points.empty() || grid.points.size() != grid.weights.size())
        throw ConfigError("eta grid needs matching, nonempty points and weights");
    double total = 0.0;
    for (double w : grid.weights) {
        if (!(w >= 0.0)) throw ConfigError("eta grid weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("eta grid weights must sum to 1");
    if (t < 3 || (init.kind == InitialLaw::Kind::ModelChain && t < 4))
        throw ConfigError("window t=" + std::to_string(t) + " has no room for periods t-3..t+1");
    if (t + 1 > spec.last_period())
        throw ConfigError("window t=" + std::to_string(t) + " needs the effect of period t+1");

    PatternLaw law{};
    for (std::size_t g = 0; g < grid.points.size(); ++g) {
        const double eta = grid.points[g];
        double p3 = init.p_one;
        if (init.kind == InitialLaw::Kind::ModelChain) {
            p3 = logit_prob(eta, 0.0, 0, spec.effect(1));
            for (int s = 2; s <= t - 3; ++s)
                p3 = p3 * p_one(spec, eta, 1, s) + (1.0 - p3) * p_one(spec, eta, 0, s);
        }
        for (unsigned p = 0; p < kPatterns; ++p) {
            const Window5 w = Window5::from_pattern(p);
            const double pr = bernoulli(p3, w.y_tm3) * bernoulli(p_one(spec, eta, w.y_tm3, t - 2), w.y_tm2) *
                              bernoulli(p_one(spec, eta, w.y_tm2, t - 1), w.y_tm1) *
                              bernoulli(p_one(spec, eta, w.y_tm1, t), w.y_t) *
                              bernoulli(p_one(spec, eta, w.y_t, t + 1), w.y_tp1);
            law[p] += grid.weights[g] * pr;
        }
    }
    return law;
}

AggregateStats population_stats(const ModelSpec& spec, int t, const EtaGrid& grid, const InitialLaw& init) {
    return AggregateStats::from_law(t, pattern_law(spec, t, grid, init));
}

LinearSystem population_system(Family family, const ModelSpec& spec, int t, Variant variant, const EtaGrid& grid,
                               const InitialLaw& init) {
    return build_any(family, population_stats(spec, t, grid, init), variant);
}

double scaled_hbar_form(Family f, int which, const Window5& w, const PeriodParams& p) {
    const double y2 = w.y_tm2;
    const double d1 = 1.0 + p.delta;
    const double pp = p.phi_t * p.phi_tp1;
    const double u = hbar_u(w, p);
    const double ups = hbar_upsilon(w, p);
    switch (f) {
        case Family::A:
            switch (which) {
                case 1: return 0.5 * (pp + 1.0) * (1.0 - y2) * u;
                case 2: return 0.5 * (pp + d1) / d1 * y2 * u;
                case 3: return 0.5 * (1.0 / pp + 1.0) * p.phi_t / d1 * y2 * ups;
                case 4: return 0.5 * (1.0 / pp + d1) * p.phi_t / d1 * (1.0 - y2) * ups;
            }
            break;
        case Family::B:
            switch (which) {
                case 1: return 0.5 * (pp + 1.0) / (p.phi_t * d1) * (1.0 - y2) * u;
                case 2: return 0.5 * (pp + d1) / (p.phi_t * d1) * y2 * u;
                case 3: return 0.5 * (1.0 / pp + 1.0) * y2 * ups;
                case 4: return 0.5 * (1.0 / pp + d1) / d1 * (1.0 - y2) * ups;
            }
            break;
        case Family::C: {
            const double phi = p.phi_t;
            const double phi2 = phi * phi;
            switch (which) {
                case 1: return 0.5 * (phi2 + 1.0) * (1.0 - y2) * u;
                case 2: return 0.5 * (phi2 + d1) / (phi * d1) * y2 * u;
                case 3: return 0.5 * (1.0 / phi2 + 1.0) * y2 * ups;
                case 4: return 0.5 * (1.0 / phi2 + d1) * phi / d1 * (1.0 - y2) * ups;
            }
            break;
        }
    }
    throw ConfigError("moment index must be in 1..4");
}

Eigen::MatrixXd moment_value_matrix(Family family, const ModelSpec& spec, int t, const std::vector<int>& rows) {
    const auto alpha_t = alpha_from_spec(family, spec, t);
    const auto alpha_tm1 = family == Family::C ? alpha_from_spec(family, spec, t - 1) : alpha_t;
    const auto defs = moment_defs(family);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), kPatterns);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const int r = rows[k];
        if (r < 1 || r > 8) throw ConfigError("moment rows are numbered 1..8");
        const MomentDef& def = defs[static_cast<std::size_t>((r - 1) % 4)];
        for (unsigned p = 0; p < kPatterns; ++p) {
            const Window5 w = Window5::from_pattern(p);
            double v;
            if (r <= 4)
                v = evaluate_moment(def, w, alpha_t);
            else if (family == Family::C)
                v = evaluate_moment(def, w.lagged(), alpha_tm1);
            else
                v = w.y_tm3 * evaluate_moment(def, w, alpha_t);
            m(static_cast<Eigen::Index>(k), p) = v;
        }
    }
    return m;
}

int moment_rank(Family family, const ModelSpec& spec, int t, const std::vector<int>& rows) {
    const Eigen::MatrixXd m = moment_value_matrix(family, spec, t, rows);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    return static_cast<int>((s.array() > 1e-10 * s(0)).count());
}

std::string_view verify_level_name(VerifyLevel l) {
    switch (l) {
        case VerifyLevel::Identities: return "identities";
        case VerifyLevel::Moments: return "moments";
        case VerifyLevel::Ranks: return "ranks";
        case VerifyLevel::Population: return "population";
    }
    return "?";
}

VerifyLevel parse_verify_level(std::string_view s) {
    for (VerifyLevel l : all_verify_levels())
        if (verify_level_name(l) == s) return l;
    throw ConfigError("unknown verify level '" + std::string(s) +
                      "' (expected identities, moments, ranks or population)");
}

std::vector<VerifyLevel> all_verify_levels() {
    return {VerifyLevel::Identities, VerifyLevel::Moments, VerifyLevel::Ranks, VerifyLevel::Population};
}

CheckResult check_identities(const VerifyOptions& opt) {
    CheckResult res{"identities: 12 expansions vs scaled g/h forms", true, 0.0, ""};
    KeyedUniform u(opt.seed);
    std::int64_t compared = 0;
    for (int draw = 0; draw < opt.draws; ++draw) {
        const auto rep = static_cast<std::uint32_t>(draw);
        const double gamma = -2.0 + 4.0 * u(rep, 0, 0);
        const double dtd_t = -1.0 + 2.0 * u(rep, 0, 1);
        const double dtd_tp1 = -1.0 + 2.0 * u(rep, 0, 2);
        const double slope = -1.0 + 2.0 * u(rep, 0, 3);
        const PeriodParams dummies{std::expm1(gamma), std::exp(dtd_t), std::exp(dtd_tp1)};
        const PeriodParams trend{std::expm1(gamma), std::exp(slope), std::exp(slope)};
        for (Family f : {Family::A, Family::B, Family::C}) {
            const PeriodParams& p = f == Family::C ? trend : dummies;
            const auto alpha = alpha_from_params(f, p);
            for (unsigned pat = 0; pat < kPatterns; ++pat) {
                const Window5 w = Window5::from_pattern(pat);
                for (int which = 1; which <= 4; ++which) {
                    const double gap = rel_gap(expansion(f, which, w, alpha, opt.mutate_kernel_sign),
                                               scaled_hbar_form(f, which, w, p));
                    res.max_violation = std::max(res.max_violation, gap);
                    ++compared;
                }
            }
        }
    }
    res.passed = res.max_violation <= 1e-12;
    res.detail = std::to_string(compared) + " comparisons, max relative gap " + fmt(res.max_violation);
    return res;
}

CheckResult check_zero_mean(const VerifyOptions& opt) {
    CheckResult res{"moments: conditional means vanish at the truth", true, 0.0, ""};
    const ModelSpec dummies(TimeDummies{1.0, {0.1, -0.1, 0.3, -0.3, -0.1, 0.3, 0.5, 0.2}});
    const ModelSpec trend(TimeTrend{1.0, 0.3, 1.0});
    std::int64_t evaluated = 0;
    for (const ModelSpec* spec : {&dummies, &trend}) {
        std::vector<Family> families{Family::A, Family::B};
        if (spec->is_trend()) families.push_back(Family::C);
        for (int t = 4; t <= 7; ++t) {
            const PeriodParams p = period_params(*spec, t);
            for (double eta : {-2.0, -1.0, 0.0, 1.0, 2.0})
                for (int y2 = 0; y2 < 2; ++y2)
                    for (int y3 = 0; y3 < 2; ++y3) {
                        const ConditioningState st{eta, y2, y3};
                        std::vector<MomentFn> fns{[&](const Window5& w) { return hbar_u(w, p); },
                                                  [&](const Window5& w) { return hbar_upsilon(w, p); }};
                        for (Family f : families) {
                            const auto alpha = alpha_from_spec(f, *spec, t);
                            for (int which = 1; which <= 4; ++which)
                                fns.push_back([f, which, alpha, &opt](const Window5& w) {
                                    return expansion(f, which, w, alpha, opt.mutate_kernel_sign);
                                });
                        }
                        for (const auto& fn : fns) {
                            const double v = std::abs(conditional_moment(*spec, t, st, fn));
                            res.max_violation = std::max(res.max_violation, v);
                            ++evaluated;
                        }
                    }
        }
    }
    res.passed = res.max_violation <= 1e-12;
    res.detail = std::to_string(evaluated) + " conditional means, max |E| " + fmt(res.max_violation);
    return res;
}

CheckResult check_population_recovery(const VerifyOptions&) {
    CheckResult res{"population: exact moments reproduce the true parameters", true, 0.0, ""};
    const int t = 7;
    const EtaGrid grid = EtaGrid::uniform({-1.0, 0.0, 1.0});
    std::vector<Variant> variants{Variant::minus_3_7(), Variant::minus_1_5()};
    for (int r = 1; r <= 8; ++r) variants.push_back(Variant::minus_row(r));
    int systems = 0;
    std::string failures;
    auto track = [&](double gap, const std::string& what) {
        res.max_violation = std::max(res.max_violation, gap);
        if (!(gap <= 1e-8) && failures.size() < 200) failures += " " + what;
    };
    auto solve_and_compare = [&](Family f, const ModelSpec& spec, Variant v, OriginalEstimate& orig) {
        const LinearSystem sys = population_system(f, spec, t, v, grid);
        const TransformedEstimate est = estimate(sys);
        const auto truth = alpha_from_spec(f, spec, t);
        for (std::size_t k = 0; k < est.names.size(); ++k)
            track(rel_gap(est.alpha_hat(static_cast<Eigen::Index>(k)),
                          truth[static_cast<std::size_t>(sys.columns()[k])]),
                  std::string(family_name(f)) + ":" + v.name());
        orig = recover_original(est);
        ++systems;
        if (f != Family::C && est.has("d")) {
            const TwoStepResult ts = two_step_dtd_tm1(sys, est);
            track(std::abs(ts.dtd_tm1.estimate - spec.effect_step(t - 1)),
                  std::string(family_name(f)) + ":" + v.name() + ":two-step");
        }
    };

    for (double gamma : {-0.8, 0.5, 1.2})
        for (double dtd_t : {-0.3, 0.2, 0.6})
            for (double dtd_tp1 : {-0.5, 0.1, 0.4}) {
                const ModelSpec spec(dummies_at(t, gamma, 0.4, dtd_t, dtd_tp1));
                for (Variant v : variants) {
                    OriginalEstimate oa, ob;
                    try {
                        solve_and_compare(Family::A, spec, v, oa);
                        solve_and_compare(Family::B, spec, v, ob);
                    } catch (const Error& e) {
                        track(INFINITY, v.name() + "(" + e.what() + ")");
                        continue;
                    }
                    for (const OriginalEstimate* o : {&oa, &ob}) {
                        track(std::abs(o->gamma.estimate - gamma), "gamma");
                        track(std::abs(o->dtd_t.estimate - dtd_t), "dtd_t");
                        track(std::abs(o->dtd_tp1.estimate - dtd_tp1), "dtd_tp1");
                    }
                    track(std::abs(oa.gamma.estimate - ob.gamma.estimate), "A-vs-B");
                }
            }
    for (double gamma : {-0.8, 0.5, 1.2})
        for (double slope : {-0.4, 0.3, 0.7})
            for (double tau : {0.0, 1.0, 2.5}) {
                const ModelSpec spec(TimeTrend{gamma, slope, tau});
                OriginalEstimate oc;
                try {
                    solve_and_compare(Family::C, spec, Variant::full(), oc);
                } catch (const Error& e) {
                    track(INFINITY, std::string("C(") + e.what() + ")");
                    continue;
                }
                track(std::abs(oc.gamma.estimate - gamma), "C:gamma");
                track(std::abs(oc.phi_coef.estimate - slope), "C:phi");
            }
    res.passed = res.max_violation <= 1e-8;
    res.detail = std::to_string(systems) + " systems, max gap " + fmt(res.max_violation);
    if (!failures.empty()) res.detail += "; failing:" + failures;
    return res;
}

CheckResult check_degeneracy_loci(const VerifyOptions&) {
    CheckResult res{"ranks: full rank off the degeneracy loci, deficient on them", true, 0.0, ""};
    const int t = 7;
    const std::vector<int> a37{1, 2, 4, 5, 6, 8}, b15{2, 3, 4, 6, 7, 8}, all{1, 2, 3, 4, 5, 6, 7, 8};
    std::ostringstream detail;
    bool ok = true;
    auto expect = [&](const char* label, int rank, bool want_full, int full) {
        const bool good = want_full ? rank == full : rank < full;
        ok = ok && good;
        detail << label << "=" << rank << (good ? "" : "(!)") << " ";
    };
    for (double gamma : {-0.8, 0.5, 1.2})
        for (double dtd_tp1 : {-0.5, 0.1, 0.4}) {
            const ModelSpec spec(dummies_at(t, gamma, 0.4, 0.2, dtd_tp1));
            ok = ok && moment_rank(Family::A, spec, t, a37) == 6 && moment_rank(Family::B, spec, t, b15) == 6 &&
                 moment_rank(Family::A, spec, t, all) == 8 && moment_rank(Family::B, spec, t, all) == 8;
            const ModelSpec tr(TimeTrend{gamma, dtd_tp1, 1.0});
            ok = ok && moment_rank(Family::C, tr, t, all) == 8;
        }
    detail << "generic grid " << (ok ? "full rank" : "RANK DEFICIENT") << "; ";
    for (double dtd_t : {-0.3, 0.2, 0.6}) {
        const ModelSpec locus(dummies_at(t, 0.0, 0.4, dtd_t, 0.0));
        expect("A-(3+7)", moment_rank(Family::A, locus, t, a37), false, 6);
        expect("B-(1+5)", moment_rank(Family::B, locus, t, b15), false, 6);
    }
    const ModelSpec flat(TimeTrend{0.0, 0.0, 1.0});
    expect("C", moment_rank(Family::C, flat, t, all), false, 8);
    res.passed = ok;
    res.max_violation = ok ? 0.0 : 1.0;
    res.detail = detail.str();
    return res;
}

CheckResult check_three_period_underidentification(const VerifyOptions& opt) {
    CheckResult res{"identities: three periods cannot identify (delta, phi_t, phi_t+1)", true, 0.0, ""};
    KeyedUniform u(opt.seed ^ 0x5bd1e995u);
    int max_rank = 0;
    for (int draw = 0; draw < opt.draws; ++draw) {
        const auto rep = static_cast<std::uint32_t>(draw);
        const PeriodParams p{std::expm1(-2.0 + 4.0 * u(rep, 1, 0)), std::exp(-1.0 + 2.0 * u(rep, 1, 1)),
                             std::exp(-1.0 + 2.0 * u(rep, 1, 2))};
        const auto alpha = alpha_from_params(Family::A, p);
        Eigen::MatrixXd vals(2, 8);
        for (int y3 = 0; y3 < 2; ++y3)
            for (unsigned path = 0; path < 8; ++path) {
                const Window5 w = path_window({0.0, 0, y3}, path);
                res.max_violation = std::max({res.max_violation,
                                              std::abs(expansion(Family::A, 2, w, alpha, opt.mutate_kernel_sign)),
                                              std::abs(expansion(Family::A, 3, w, alpha, opt.mutate_kernel_sign))});
                if (y3 == 0) {
                    vals(0, path) = expansion(Family::A, 1, w, alpha, opt.mutate_kernel_sign);
                    vals(1, path) = expansion(Family::A, 4, w, alpha, opt.mutate_kernel_sign);
                }
            }
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(vals);
        const auto& s = svd.singularValues();
        max_rank = std::max(max_rank, static_cast<int>((s.array() > 1e-10 * s(0)).count()));
    }
    res.passed = res.max_violation == 0.0 && max_rank <= 2;
    res.detail = "iota*, kappa with y_{t-2}=0: max |value| " + fmt(res.max_violation) + "; rank {iota, kappa*} = " +
                 std::to_string(max_rank) + " < 3 parameters";
    return res;
}

std::vector<CheckResult> run_verify(const std::vector<VerifyLevel>& levels, const VerifyOptions& opt) {
    if (levels.empty()) throw ConfigError("verify needs at least one level");
    std::vector<CheckResult> out;
    for (VerifyLevel l : levels) {
        switch (l) {
            case VerifyLevel::Identities:
                out.push_back(check_identities(opt));
                out.push_back(check_three_period_underidentification(opt));
                break;
            case VerifyLevel::Moments: out.push_back(check_zero_mean(opt)); break;
            case VerifyLevel::Ranks: out.push_back(check_degeneracy_loci(opt)); break;
            case VerifyLevel::Population: out.push_back(check_population_recovery(opt)); break;
        }
    }
    return out;
}

}  // namespace panel_logit

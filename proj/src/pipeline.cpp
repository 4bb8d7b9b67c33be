#include "panel_logit/pipeline.hpp"

#include <sstream>

#include "panel_logit/aggregation.hpp"

namespace panel_logit {

std::string EstimatorSpec::label() const {
    return std::string(family_name(family)) + " " + variant.name() + " t=" + std::to_string(window);
}

std::string EstimatorSpec::to_string() const {
    std::string s = std::string(family_name(family)) + " " + variant.name() + " " + std::to_string(window);
    if (two_step) s += " two-step";
    if (wald) {
        s += " wald";
        if (wald_set) s += "=" + std::string(restriction_set_name(*wald_set));
    }
    return s;
}

EstimatorSpec EstimatorSpec::parse(const std::string& s) {
    std::istringstream in(s);
    std::string fam, var, win, tok;
    if (!(in >> fam >> var >> win)) throw ConfigError("estimator '" + s + "': expected <family> <variant> <window>");
    EstimatorSpec e;
    e.family = parse_family(fam);
    e.variant = Variant::parse(var);
    try {
        std::size_t used = 0;
        e.window = std::stoi(win, &used);
        if (used != win.size()) throw std::invalid_argument(win);
    } catch (const std::logic_error&) {
        throw ConfigError("estimator '" + s + "': window must be an integer");
    }
    while (in >> tok) {
        if (tok == "two-step") {
            e.two_step = true;
        } else if (tok == "wald") {
            e.wald = true;
        } else if (tok.rfind("wald=", 0) == 0) {
            e.wald = true;
            e.wald_set = parse_restriction_set(tok.substr(5));
        } else {
            throw ConfigError("estimator '" + s + "': unknown option '" + tok + "'");
        }
    }
    if (e.family == Family::C && e.two_step) throw ConfigError("estimator '" + s + "': two-step needs family A or B");
    if (e.family == Family::C && e.variant.kind != VariantKind::Full)
        throw ConfigError("estimator '" + s + "': family C uses the full variant");
    if (e.family != Family::C && e.variant.kind == VariantKind::Full)
        throw ConfigError("estimator '" + s + "': families A and B need a minus-* variant");
    return e;
}

EstimationReport run_estimation(const AggregateStats& stats, const EstimatorSpec& request) {
    EstimationReport rep;
    rep.request = request;
    const LinearSystem sys = build_any(request.family, stats, request.variant);
    rep.rcond = reciprocal_condition(sys.x());
    rep.guards = uniqueness_guards(sys);
    rep.transformed = estimate(sys);
    rep.original = recover_original(rep.transformed);
    if (request.two_step) {
        rep.two_step = two_step_dtd_tm1(sys, rep.transformed);
        rep.original.dtd_tm1 = rep.two_step->dtd_tm1;
    }
    if (request.wald)
        rep.wald = wald_test(rep.transformed, request.wald_set.value_or(default_restriction_set(request.family)));
    return rep;
}

EstimationReport run_estimation(const PanelData& panel, const EstimatorSpec& request, unsigned threads) {
    return run_estimation(aggregate(panel, request.window, threads), request);
}

}  // namespace panel_logit

#include "panel_logit/mc.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "panel_logit/parallel.hpp"

namespace panel_logit {

void McConfig::validate() const {
    if (replications < 1) throw ConfigError("mc: replications must be at least 1");
    if (estimators.empty()) throw ConfigError("mc: no estimators configured");
    if (discard_prefix < 0) throw ConfigError("mc: discard must be nonnegative");
    if (discard_prefix >= cfg.n_periods) throw ConfigError("mc: discard leaves no periods");
    if (!spec.is_trend() && static_cast<int>(spec.dummies().td.size()) < cfg.n_periods)
        throw ConfigError("mc: the model defines fewer time dummies than periods");
    for (const auto& e : estimators) {
        if (e.window - 3 < discard_prefix + 1 || e.window + 1 > cfg.n_periods)
            throw ConfigError("mc: window t=" + std::to_string(e.window) + " needs periods t-3..t+1 within " +
                              std::to_string(discard_prefix + 1) + ".." + std::to_string(cfg.n_periods));
        if (e.family == Family::C && !spec.is_trend())
            throw ConfigError("mc: family C needs the trend model");
    }
}

std::string_view failure_kind_name(FailureKind k) {
    switch (k) {
        case FailureKind::None: return "ok";
        case FailureKind::Singular: return "singular";
        case FailureKind::NonpositiveAlpha: return "nonpositive";
        case FailureKind::Other: return "other";
    }
    return "?";
}

const ParamSummary& EstimatorSummary::param(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return p;
    throw ConfigError("summary of " + label + " has no parameter " + name);
}

namespace {

std::string dtd_name(int period) { return "dtd_" + std::to_string(period); }

std::vector<ParamDraw> draws_from(const McConfig& config, const EstimatorSpec& est, const EstimationReport& rep) {
    const ModelSpec& spec = config.spec;
    const int t = est.window;
    const OriginalEstimate& o = rep.original;
    std::vector<ParamDraw> out;
    out.push_back({"gamma", spec.gamma(), o.gamma.estimate, o.gamma.se});
    if (est.family == Family::C) {
        out.push_back({"phi", spec.trend().phi_coef, o.phi_coef.estimate, o.phi_coef.se});
    } else {
        if (o.dtd_tm1) out.push_back({dtd_name(t - 1), spec.effect_step(t - 1), o.dtd_tm1->estimate, o.dtd_tm1->se});
        out.push_back({dtd_name(t), spec.effect_step(t), o.dtd_t.estimate, o.dtd_t.se});
        out.push_back({dtd_name(t + 1), spec.effect_step(t + 1), o.dtd_tp1.estimate, o.dtd_tp1.se});
    }
    if (config.alpha_parameters) {
        const auto truth = alpha_from_spec(est.family, spec, t);
        const auto& te = rep.transformed;
        for (std::size_t k = 0; k < te.names.size(); ++k)
            out.push_back({"alpha_" + te.names[k], truth[static_cast<std::size_t>(alpha_index(est.family, te.names[k]))],
                           te.alpha_hat(static_cast<Eigen::Index>(k)), te.se(te.names[k])});
    }
    return out;
}

}  // namespace

namespace {

FailureKind classify(const std::exception_ptr& ep, std::string& message) {
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError&) {
        throw;
    } catch (const SingularSystem& e) {
        message = e.what();
        return FailureKind::Singular;
    } catch (const SingularWeight& e) {
        message = e.what();
        return FailureKind::Singular;
    } catch (const ZeroDenominator& e) {
        message = e.what();
        return FailureKind::Singular;
    } catch (const SingularRestrictionCovariance& e) {
        message = e.what();
        return FailureKind::Singular;
    } catch (const NonpositiveAlpha& e) {
        message = e.what();
        return FailureKind::NonpositiveAlpha;
    } catch (const NonpositivePhiHat& e) {
        message = e.what();
        return FailureKind::NonpositiveAlpha;
    } catch (const Error& e) {
        message = e.what();
        return FailureKind::Other;
    }
}

}  // namespace

EstimatorOutcome estimator_outcome(const McConfig& config, const EstimatorSpec& est, const PanelData& panel) {
    EstimatorOutcome out;
    EstimatorSpec first = est;
    first.wald = false;
    std::optional<EstimationReport> rep;
    try {
        rep = run_estimation(panel, first, 1);
        out.params = draws_from(config, est, *rep);
    } catch (...) {
        out.failure = classify(std::current_exception(), out.message);
        return out;
    }
    if (est.wald) {
        try {
            out.wald = wald_test(rep->transformed, est.wald_set.value_or(default_restriction_set(est.family)));
        } catch (...) {
            std::string msg;
            out.wald_failure = classify(std::current_exception(), msg);
        }
    }
    return out;
}

std::vector<EstimatorOutcome> estimate_replication(const McConfig& config, std::uint32_t replication) {
    const PanelData full = simulate_panel(config.spec, config.cfg, replication, 1);
    const PanelData panel =
        config.discard_prefix > 0 ? full.slice(config.discard_prefix + 1, config.cfg.n_periods) : full;
    std::vector<EstimatorOutcome> out;
    for (const auto& e : config.estimators) out.push_back(estimator_outcome(config, e, panel));
    return out;
}

McOutcomes run_replications(int replications, unsigned threads, const ReplicationFn& fn) {
    McOutcomes outcomes(static_cast<std::size_t>(replications));
    parallel_for_chunks(replications, 1, resolve_threads(threads), [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r)
            outcomes[static_cast<std::size_t>(r)] = fn(static_cast<std::uint32_t>(r));
    });
    return outcomes;
}

McSummary summarize(const std::vector<std::string>& labels, const McOutcomes& outcomes) {
    McSummary s;
    s.replications = static_cast<int>(outcomes.size());
    for (std::size_t e = 0; e < labels.size(); ++e) {
        EstimatorSummary es;
        es.label = labels[e];
        const std::vector<ParamDraw>* layout = nullptr;
        int wald_runs = 0, rejections = 0;
        for (const auto& rep : outcomes) {
            if (rep.size() != labels.size()) throw ConfigError("mc: replication has the wrong number of outcomes");
            const EstimatorOutcome& o = rep[e];
            switch (o.failure) {
                case FailureKind::None: ++es.successes; break;
                case FailureKind::Singular: ++es.singular_failures; break;
                case FailureKind::NonpositiveAlpha: ++es.nonpositive_failures; break;
                case FailureKind::Other: ++es.other_failures; break;
            }
            if (o.failure != FailureKind::None) continue;
            if (!layout) layout = &o.params;
            if (o.wald_failure != FailureKind::None) ++es.wald_failures;
            if (o.wald) {
                ++wald_runs;
                es.wald_df = o.wald->df;
                if (o.wald->p_value < 0.05) ++rejections;
            }
        }
        if (es.successes == 0)
            throw AllReplicationsFailed("mc: every replication of " + es.label + " failed");
        es.wald_computed = wald_runs;
        if (wald_runs > 0) es.wald_rejection_rate = static_cast<double>(rejections) / wald_runs;

        for (std::size_t k = 0; k < layout->size(); ++k) {
            ParamSummary ps;
            ps.name = (*layout)[k].name;
            ps.truth = (*layout)[k].truth;
            double sum = 0.0, se_sum = 0.0, sq_true = 0.0;
            for (const auto& rep : outcomes) {
                const EstimatorOutcome& o = rep[e];
                if (o.failure != FailureKind::None) continue;
                const ParamDraw& d = o.params.at(k);
                sum += d.estimate;
                se_sum += d.se;
                sq_true += (d.estimate - ps.truth) * (d.estimate - ps.truth);
            }
            const double n = es.successes;
            ps.mean = sum / n;
            ps.se = se_sum / n;
            double ss = 0.0;
            for (const auto& rep : outcomes) {
                const EstimatorOutcome& o = rep[e];
                if (o.failure != FailureKind::None) continue;
                const double dev = o.params[k].estimate - ps.mean;
                ss += dev * dev;
            }
            ps.sd = es.successes > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            ps.bias = ps.mean - ps.truth;
            ps.rmse = std::sqrt(sq_true / n);
            es.params.push_back(ps);
        }
        s.estimators.push_back(std::move(es));
    }
    return s;
}

McSummary run_mc(const McConfig& config, McOutcomes* outcomes) {
    config.validate();
    std::vector<std::string> labels;
    for (const auto& e : config.estimators) labels.push_back(e.label());
    McOutcomes out = run_replications(config.replications, config.threads,
                                      [&](std::uint32_t r) { return estimate_replication(config, r); });
    McSummary s = summarize(labels, out);
    if (outcomes) *outcomes = std::move(out);
    return s;
}

void write_summary_csv(std::ostream& out, const McSummary& s) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "estimator,parameter,true,mean,sd,se,bias,rmse,successes,singular,nonpositive,other,wald_df,"
           "wald_rejection_rate,wald_computed,wald_failures\n";
    for (const auto& e : s.estimators)
        for (const auto& p : e.params) {
            out << e.label << ',' << p.name << ',' << p.truth << ',' << p.mean << ',' << p.sd << ',' << p.se << ','
                << p.bias << ',' << p.rmse << ',' << e.successes << ',' << e.singular_failures << ','
                << e.nonpositive_failures << ',' << e.other_failures << ',';
            if (e.wald_rejection_rate) out << e.wald_df << ',' << *e.wald_rejection_rate;
            else out << ',';
            out << ',' << e.wald_computed << ',' << e.wald_failures;
            out << '\n';
        }
    out.precision(old);
}

void write_summary_text(std::ostream& out, const McSummary& s) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(5);
    for (const auto& e : s.estimators) {
        o << e.label << "  (" << e.successes << " of " << s.replications << " replications";
        if (e.failures() > 0)
            o << "; failed: " << e.singular_failures << " singular, " << e.nonpositive_failures << " nonpositive, "
              << e.other_failures << " other";
        o << ")\n";
        o << std::setw(10) << "" << std::setw(11) << "true" << std::setw(11) << "mean" << std::setw(11) << "sd"
          << std::setw(11) << "se" << std::setw(11) << "bias" << std::setw(11) << "rmse" << '\n';
        for (const auto& p : e.params)
            o << std::left << std::setw(10) << p.name << std::right << std::setw(11) << p.truth << std::setw(11)
              << p.mean << std::setw(11) << p.sd << std::setw(11) << p.se << std::setw(11) << p.bias
              << std::setw(11) << p.rmse << '\n';
        if (e.wald_rejection_rate)
            o << "Wald (df=" << e.wald_df << ") rejection rate at 5%: " << *e.wald_rejection_rate << " over "
              << e.wald_computed << " tests\n";
        if (e.wald_failures > 0) o << "Wald not computable in " << e.wald_failures << " replications\n";
        o << '\n';
    }
    out << o.str();
}

void write_raw_csv(std::ostream& out, const std::vector<std::string>& labels, const McOutcomes& outcomes) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "replication,estimator,status,parameter,estimate,se,wald_statistic,wald_p\n";
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        for (std::size_t e = 0; e < labels.size(); ++e) {
            const EstimatorOutcome& o = outcomes[r][e];
            if (o.failure != FailureKind::None) {
                out << r << ',' << labels[e] << ',' << failure_kind_name(o.failure) << ",,,,,\n";
                continue;
            }
            for (const auto& p : o.params) {
                out << r << ',' << labels[e] << ",ok," << p.name << ',' << p.estimate << ',' << p.se << ',';
                if (o.wald) out << o.wald->statistic << ',' << o.wald->p_value;
                else out << ',';
                out << '\n';
            }
        }
    out.precision(old);
}

}  // namespace panel_logit

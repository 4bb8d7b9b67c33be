#include "panel_logit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "panel_logit/aggregation.hpp"
#include "panel_logit/config.hpp"
#include "panel_logit/mc.hpp"
#include "panel_logit/oracle.hpp"
#include "panel_logit/panel_io.hpp"
#include "panel_logit/parallel.hpp"
#include "panel_logit/pipeline.hpp"

namespace panel_logit {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string> kManifestKeys{"command", "tool_version", "threads", "elapsed_seconds"};
const std::set<std::string> kModelKeys{"model", "gamma", "td", "phi", "tau", "n", "periods", "sigma_eta_sq", "seed"};

std::set<std::string> keys(std::initializer_list<const std::set<std::string>*> sets, std::set<std::string> extra) {
    for (const auto* s : sets) extra.insert(s->begin(), s->end());
    return extra;
}

struct Common {
    std::string config;
    std::vector<std::string> set;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
    cmd->add_option("--config", c.config, "key = value configuration file (a manifest works too)");
    cmd->add_option("--set", c.set, "override a configuration key, key=value");
    if (with_seed) cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--threads", c.threads, "worker threads (default: PANEL_LOGIT_THREADS or all cores)");
    cmd->add_option("--out", c.out, "output file (default: standard output)");
}

Config resolve(const Common& c, const std::string& command) {
    Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
    if (auto cmd = cfg.find("command"); cmd && *cmd != command)
        throw ConfigError("manifest was written by '" + *cmd + "', not '" + command + "'");
    for (const auto& kv : c.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.set("seed", std::to_string(*c.seed));
    if (c.threads) cfg.set("threads", std::to_string(*c.threads));
    return cfg;
}

unsigned threads_of(const Config& c) { return resolve_threads(static_cast<unsigned>(c.get_int_or("threads", 0))); }

// The manifest embedded in outputs: everything needed to reproduce them,
// nothing that varies between equivalent runs.
Config manifest_of(const Config& resolved, const std::string& command) {
    Config m;
    m.set("command", command);
    m.set("tool_version", kToolVersion);
    for (const auto& [k, v] : resolved.entries())
        if (!kManifestKeys.contains(k)) m.add(k, v);
    return m;
}

json manifest_json(const Config& m) {
    json j = json::object();
    for (const auto& [k, v] : m.entries()) {
        if (j.contains(k)) {
            if (!j[k].is_array()) j[k] = json::array({j[k]});
            j[k].push_back(v);
        } else {
            j[k] = v;
        }
    }
    return j;
}

void write_sidecar(const std::string& out, const Config& manifest, unsigned threads, double seconds) {
    if (out.empty()) return;
    std::ofstream f(out + ".manifest");
    if (!f) throw ConfigError("cannot write '" + out + ".manifest'");
    f << "# rerun: panel_logit " << manifest.get("command") << " --config " << out << ".manifest --out <file>\n";
    manifest.write(f);
    f << "threads = " << threads << '\n';
    f << "# elapsed_seconds = " << std::fixed << std::setprecision(3) << seconds << '\n';
}

template <class F>
void emit(const std::string& path, std::ostream& out, F&& writer) {
    if (path.empty()) {
        writer(out);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    writer(f);
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- simulate ----

int cmd_simulate(const Common& common, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Config c = resolve(common, "simulate");
    c.require_known(keys({&kManifestKeys, &kModelKeys}, {"replication", "replications", "discard", "estimator", "alpha_parameters"}));
    const ModelSpec spec = model_from_config(c);
    const DgpConfig dgp = dgp_from_config(c);
    const auto rep = static_cast<std::uint32_t>(c.get_int_or("replication", 0));
    const unsigned threads = threads_of(c);
    const PanelData panel = simulate_panel(spec, dgp, rep, threads);

    Config resolved;
    store_model(resolved, spec);
    store_dgp(resolved, dgp);
    resolved.set("replication", std::to_string(rep));
    const Config manifest = manifest_of(resolved, "simulate");
    emit(common.out, out, [&](std::ostream& o) { write_panel_csv(o, panel); });
    write_sidecar(common.out, manifest, threads, seconds_since(t0));
    return kExitOk;
}

// ---- estimate / wald ----

struct EstimateFlags {
    std::string panel;
    std::string family;
    std::string variant;
    std::optional<int> window;
    bool two_step = false;
    bool wald = false;
    std::string restrictions;
};

void add_estimate_flags(CLI::App* cmd, EstimateFlags& f, bool estimate) {
    cmd->add_option("--panel", f.panel, "panel CSV with columns id,t,y");
    cmd->add_option("--family", f.family, "A, B or C");
    cmd->add_option("--variant", f.variant, "minus-r:<k>, minus-3-7, minus-1-5 or full");
    cmd->add_option("--window", f.window, "window period t (uses t-3..t+1)");
    if (estimate) {
        cmd->add_flag("--two-step", f.two_step, "two-step Delta TD_{t-1} (families A and B)");
        cmd->add_flag("--wald", f.wald, "Wald test of the log-alpha restrictions");
    }
    cmd->add_option("--restrictions", f.restrictions, "dummies, trend-c or trend-ab (default by family)");
}

const std::set<std::string> kEstimateKeys{"panel", "family", "variant", "window", "two_step", "wald", "restrictions"};

void apply_estimate_flags(Config& c, const EstimateFlags& f) {
    if (!f.panel.empty()) c.set("panel", f.panel);
    if (!f.family.empty()) c.set("family", f.family);
    if (!f.variant.empty()) c.set("variant", f.variant);
    if (f.window) c.set("window", std::to_string(*f.window));
    if (f.two_step) c.set("two_step", "true");
    if (f.wald) c.set("wald", "true");
    if (!f.restrictions.empty()) c.set("restrictions", f.restrictions);
}

EstimatorSpec estimator_from(const Config& c) {
    EstimatorSpec e;
    e.family = parse_family(c.get_or("family", "A"));
    const std::string fallback = e.family == Family::A ? "minus-3-7" : e.family == Family::B ? "minus-1-5" : "full";
    std::string s = std::string(family_name(e.family)) + " " + c.get_or("variant", fallback) + " " + c.get("window");
    if (c.get_bool_or("two_step", false)) s += " two-step";
    if (c.get_bool_or("wald", false) || c.has("restrictions")) {
        s += " wald";
        if (c.has("restrictions")) s += "=" + c.get("restrictions");
    }
    return EstimatorSpec::parse(s);
}

Config resolved_estimate(const Config& c, const EstimatorSpec& e) {
    Config r;
    r.set("panel", c.get("panel"));
    r.set("family", std::string(family_name(e.family)));
    r.set("variant", e.variant.name());
    r.set("window", std::to_string(e.window));
    r.set("two_step", e.two_step ? "true" : "false");
    r.set("wald", e.wald ? "true" : "false");
    if (e.wald_set) r.set("restrictions", std::string(restriction_set_name(*e.wald_set)));
    return r;
}

json param_json(const Param& p) { return {{"estimate", p.estimate}, {"se", p.se}}; }

json wald_json(const WaldResult& w, RestrictionSet set) {
    return {{"restrictions", restriction_set_name(set)}, {"statistic", w.statistic}, {"df", w.df}, {"p_value", w.p_value}};
}

json report_json(const EstimationReport& rep) {
    const auto& te = rep.transformed;
    const int t = te.window_t;
    json j;
    j["estimator"] = {{"family", family_name(te.family)}, {"variant", te.variant.name()}, {"window", t}};
    j["n"] = te.n;
    json guards = json::object();
    for (const auto& g : rep.guards) guards[g.name] = g.value;
    j["system"] = {{"rcond", rep.rcond}, {"guards", guards}};
    json alpha = json::object(), se = json::object();
    for (const auto& name : te.names) {
        alpha[name] = te.value(name);
        se[name] = te.se(name);
    }
    json vcov = json::array();
    for (Eigen::Index r = 0; r < te.vcov.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index k = 0; k < te.vcov.cols(); ++k) row.push_back(te.vcov(r, k));
        vcov.push_back(row);
    }
    j["transformed"] = {{"names", te.names}, {"alpha", alpha}, {"se", se}, {"vcov", vcov}};
    const auto& o = rep.original;
    json orig;
    orig["gamma"] = param_json(o.gamma);
    if (o.trend) {
        orig["phi"] = param_json(o.phi_coef);
    } else {
        if (o.dtd_tm1) orig["dtd_" + std::to_string(t - 1)] = param_json(*o.dtd_tm1);
        orig["dtd_" + std::to_string(t)] = param_json(o.dtd_t);
        orig["dtd_" + std::to_string(t + 1)] = param_json(o.dtd_tp1);
    }
    j["original"] = orig;
    if (rep.two_step) {
        const auto& ts = *rep.two_step;
        j["two_step"] = {{"ratio", ts.ratio},
                         {"ratio_is", te.family == Family::A ? "phi_t-1" : "1/phi_t-1"},
                         {"denominator", ts.denominator},
                         {"var_ratio", ts.var_ratio},
                         {"var_ratio_corrected", ts.var_ratio_corrected},
                         {"dtd_" + std::to_string(t - 1), param_json(ts.dtd_tm1)}};
    }
    if (rep.wald)
        j["wald"] = wald_json(*rep.wald, rep.request.wald_set.value_or(default_restriction_set(te.family)));
    return j;
}

int cmd_estimate(const Common& common, const EstimateFlags& flags, std::ostream& out, bool wald_only) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string command = wald_only ? "wald" : "estimate";
    Config c = resolve(common, command);
    apply_estimate_flags(c, flags);
    if (wald_only) c.set("wald", "true");
    c.require_known(keys({&kManifestKeys, &kEstimateKeys}, {}));
    if (!c.has("panel")) throw ConfigError(command + ": --panel is required");
    if (!c.has("window")) throw ConfigError(command + ": --window is required");
    const EstimatorSpec e = estimator_from(c);
    const unsigned threads = threads_of(c);
    const PanelData panel = read_panel_csv_file(c.get("panel"));
    const EstimationReport rep = run_estimation(panel, e, threads);

    const Config manifest = manifest_of(resolved_estimate(c, e), command);
    json j;
    j["manifest"] = manifest_json(manifest);
    if (wald_only) {
        json w = wald_json(*rep.wald, e.wald_set.value_or(default_restriction_set(e.family)));
        w["estimator"] = {{"family", family_name(e.family)}, {"variant", e.variant.name()}, {"window", e.window}};
        j["wald"] = w;
    } else {
        const json body = report_json(rep);
        for (const auto& [k, v] : body.items()) j[k] = v;
    }
    emit(common.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    write_sidecar(common.out, manifest, threads, seconds_since(t0));
    return kExitOk;
}

// ---- mc ----

int cmd_mc(const Common& common, const std::string& raw, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Config c = resolve(common, "mc");
    c.require_known(keys({&kManifestKeys, &kModelKeys},
                         {"replications", "discard", "estimator", "alpha_parameters"}));
    McConfig mc = mc_from_config(c);
    mc.threads = threads_of(c);
    McOutcomes outcomes;
    const McSummary summary = run_mc(mc, raw.empty() ? nullptr : &outcomes);

    Config resolved;
    store_model(resolved, mc.spec);
    store_dgp(resolved, mc.cfg);
    resolved.set("replications", std::to_string(mc.replications));
    resolved.set("discard", std::to_string(mc.discard_prefix));
    resolved.set("alpha_parameters", mc.alpha_parameters ? "true" : "false");
    for (const auto& e : mc.estimators) resolved.add("estimator", e.to_string());
    const Config manifest = manifest_of(resolved, "mc");

    if (common.out.empty()) {
        write_summary_text(out, summary);
    } else {
        emit(common.out, out, [&](std::ostream& o) { write_summary_csv(o, summary); });
        write_sidecar(common.out, manifest, mc.threads, seconds_since(t0));
        write_summary_text(out, summary);
    }
    if (!raw.empty()) {
        std::vector<std::string> labels;
        for (const auto& e : mc.estimators) labels.push_back(e.label());
        emit(raw, out, [&](std::ostream& o) { write_raw_csv(o, labels, outcomes); });
    }
    return kExitOk;
}

// ---- verify ----

int cmd_verify(const std::optional<std::vector<std::string>>& levels, const std::string& mutate,
               std::optional<std::uint64_t> seed, std::ostream& out) {
    std::vector<VerifyLevel> ls;
    if (!levels) {
        ls = all_verify_levels();
    } else {
        for (const auto& l : *levels)
            if (!l.empty()) ls.push_back(parse_verify_level(l));
        if (ls.empty()) throw ConfigError("verify: empty level list");
    }
    VerifyOptions opt;
    if (seed) opt.seed = *seed;
    if (mutate == "kernel-sign") opt.mutate_kernel_sign = true;
    else if (!mutate.empty() && mutate != "none") throw ConfigError("verify: unknown mutation '" + mutate + "'");

    const auto results = run_verify(ls, opt);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(64) << r.name << std::right
            << "  max=" << std::scientific << std::setprecision(3) << r.max_violation << std::defaultfloat << "  "
            << r.detail << '\n';
    }
    out << (all ? "all checks passed" : "verification FAILED") << '\n';
    return all ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear moment estimators for dynamic fixed-effects logit panels"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common sim_c, est_c, wald_c, mc_c;
    auto* sim = app.add_subcommand("simulate", "simulate a panel and write it as id,t,y CSV");
    add_common(sim, sim_c, true);

    EstimateFlags est_f, wald_f;
    auto* est = app.add_subcommand("estimate", "estimate the transformed and original parameters of a panel");
    add_common(est, est_c, false);
    add_estimate_flags(est, est_f, true);

    auto* wald = app.add_subcommand("wald", "Wald test of the restrictions among log transformed parameters");
    add_common(wald, wald_c, false);
    add_estimate_flags(wald, wald_f, false);

    std::string raw;
    auto* mc = app.add_subcommand("mc", "Monte Carlo experiment; summary CSV at --out, table on standard output");
    add_common(mc, mc_c, true);
    mc->add_option("--raw", raw, "per-replication estimates CSV");

    std::vector<std::string> levels;
    std::string mutate;
    std::optional<std::uint64_t> verify_seed;
    auto* ver = app.add_subcommand("verify", "exact identity, moment, rank and population checks");
    auto* levels_opt = ver->add_option("--levels", levels, "comma-separated: identities, moments, ranks, population")
                           ->delimiter(',')
                           ->expected(0, -1);
    ver->add_option("--mutate", mutate, "inject a defect to show the checks fail: kernel-sign");
    ver->add_option("--seed", verify_seed, "seed of the random parameter draws");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_c, out);
        if (est->parsed()) return cmd_estimate(est_c, est_f, out, false);
        if (wald->parsed()) return cmd_estimate(wald_c, wald_f, out, true);
        if (mc->parsed()) return cmd_mc(mc_c, raw, out);
        if (ver->parsed()) {
            std::optional<std::vector<std::string>> ls;
            if (levels_opt->count() > 0) ls = levels;
            return cmd_verify(ls, mutate, verify_seed, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SingularSystem& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace panel_logit

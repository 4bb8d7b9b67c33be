#include "panel_logit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace panel_logit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty())
        throw ConfigError("config: '" + key + "' has invalid value '" + text + "'");
    return v;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        c.entries_.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

bool Config::has(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> Config::find(const std::string& key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->first == key) return it->second;
    return std::nullopt;
}

std::string Config::get(const std::string& key) const {
    auto v = find(key);
    if (!v) throw ConfigError("config: missing key '" + key + "'");
    return *v;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

std::vector<std::string> Config::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

double Config::get_double(const std::string& key) const { return parse_number<double>(key, get(key)); }
double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}
std::int64_t Config::get_int(const std::string& key) const { return parse_number<std::int64_t>(key, get(key)); }
std::int64_t Config::get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}
std::uint64_t Config::get_uint_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? parse_number<std::uint64_t>(key, get(key)) : fallback;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("config: '" + key + "' must be true or false, got '" + *v + "'");
}

void Config::set(const std::string& key, const std::string& value) {
    erase(key);
    entries_.emplace_back(key, value);
}

void Config::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

void Config::erase(const std::string& key) {
    std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

void Config::require_known(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : entries_)
        if (!allowed.contains(k)) throw ConfigError("config: unknown key '" + k + "'");
}

void Config::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_number<double>("list", trim(item)));
    return out;
}

ModelSpec model_from_config(const Config& c) {
    const std::string kind = c.get_or("model", "dummies");
    const double gamma = c.get_double("gamma");
    if (kind == "dummies") {
        auto td = parse_double_list(c.get("td"));
        if (td.empty()) throw ConfigError("config: 'td' needs at least one value");
        return ModelSpec(TimeDummies{gamma, std::move(td)});
    }
    if (kind == "trend") return ModelSpec(TimeTrend{gamma, c.get_double("phi"), c.get_double_or("tau", 0.0)});
    throw ConfigError("config: model must be 'dummies' or 'trend', got '" + kind + "'");
}

DgpConfig dgp_from_config(const Config& c) {
    DgpConfig d;
    d.n_individuals = c.get_int("n");
    d.n_periods = static_cast<int>(c.get_int("periods"));
    d.sigma_eta_sq = c.get_double("sigma_eta_sq");
    d.seed = c.get_uint_or("seed", 0);
    return d;
}

McConfig mc_from_config(const Config& c) {
    McConfig m(model_from_config(c));
    m.cfg = dgp_from_config(c);
    m.replications = static_cast<int>(c.get_int("replications"));
    m.discard_prefix = static_cast<int>(c.get_int_or("discard", 0));
    m.alpha_parameters = c.get_bool_or("alpha_parameters", false);
    m.threads = static_cast<unsigned>(c.get_int_or("threads", 0));
    for (const auto& e : c.get_all("estimator")) m.estimators.push_back(EstimatorSpec::parse(e));
    m.validate();
    return m;
}

void store_model(Config& c, const ModelSpec& spec) {
    c.set("gamma", format_double(spec.gamma()));
    if (spec.is_trend()) {
        c.set("model", "trend");
        c.set("phi", format_double(spec.trend().phi_coef));
        c.set("tau", format_double(spec.trend().tau));
        c.erase("td");
    } else {
        c.set("model", "dummies");
        std::string td;
        for (double v : spec.dummies().td) td += (td.empty() ? "" : ",") + format_double(v);
        c.set("td", td);
        c.erase("phi");
        c.erase("tau");
    }
}

void store_dgp(Config& c, const DgpConfig& d) {
    c.set("n", std::to_string(d.n_individuals));
    c.set("periods", std::to_string(d.n_periods));
    c.set("sigma_eta_sq", format_double(d.sigma_eta_sq));
    c.set("seed", std::to_string(d.seed));
}

}  // namespace panel_logit

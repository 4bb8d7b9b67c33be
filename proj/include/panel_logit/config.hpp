#pragma once

// Flat "key = value" configuration files. '#' starts a comment; a key may
// repeat where a list is expected (estimator).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "panel_logit/mc.hpp"
#include "panel_logit/model.hpp"

namespace panel_logit {

class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const;
    /// Last value of key.
    std::optional<std::string> find(const std::string& key) const;
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    /// Replaces every entry of key.
    void set(const std::string& key, const std::string& value);
    void add(const std::string& key, const std::string& value);
    void erase(const std::string& key);

    /// Throws ConfigError naming the first key outside `allowed`.
    void require_known(const std::set<std::string>& allowed) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    void write(std::ostream& out) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);
std::vector<double> parse_double_list(const std::string& s);

/// model = dummies (gamma, td) or trend (gamma, phi, tau).
ModelSpec model_from_config(const Config& c);
/// n, periods, sigma_eta_sq, seed.
DgpConfig dgp_from_config(const Config& c);
/// Model and DGP keys plus replications, discard, estimator (repeated),
/// alpha_parameters and threads.
McConfig mc_from_config(const Config& c);

/// Writes the resolved model and DGP keys back into c.
void store_model(Config& c, const ModelSpec& spec);
void store_dgp(Config& c, const DgpConfig& d);

}  // namespace panel_logit

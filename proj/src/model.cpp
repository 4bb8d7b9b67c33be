#include "panel_logit/model.hpp"

#include <boost/math/distributions/normal.hpp>

#include <climits>
#include <cmath>

#include "panel_logit/errors.hpp"
#include "panel_logit/parallel.hpp"
#include "panel_logit/rng.hpp"

namespace panel_logit {

ModelSpec::ModelSpec(TimeDummies m) : model_(std::move(m)) { validate(); }
ModelSpec::ModelSpec(TimeTrend m) : model_(m) { validate(); }

void ModelSpec::validate() const {
    if (!std::isfinite(gamma())) throw ConfigError("model: gamma must be finite");
    if (is_trend()) {
        const auto& m = trend();
        if (!std::isfinite(m.phi_coef) || !std::isfinite(m.tau))
            throw ConfigError("model: trend parameters must be finite");
    } else {
        for (double v : dummies().td)
            if (!std::isfinite(v)) throw ConfigError("model: time dummies must be finite");
    }
}

double ModelSpec::gamma() const {
    return std::visit([](const auto& m) { return m.gamma; }, model_);
}

double ModelSpec::delta() const { return std::expm1(gamma()); }

double ModelSpec::effect(int t) const {
    if (is_trend()) {
        const auto& m = trend();
        return m.phi_coef * (t - m.tau);
    }
    const auto& td = dummies().td;
    if (t < 1 || t > static_cast<int>(td.size()))
        throw ConfigError("model: no time dummy for period " + std::to_string(t));
    return td[static_cast<std::size_t>(t - 1)];
}

double ModelSpec::effect_step(int t) const {
    if (is_trend()) return trend().phi_coef;
    return effect(t) - effect(t - 1);
}

double ModelSpec::phi(int t) const { return std::exp(effect_step(t)); }

int ModelSpec::last_period() const {
    return is_trend() ? INT_MAX : static_cast<int>(dummies().td.size());
}

PanelData::PanelData(std::int64_t n, int periods, int t0, std::vector<std::string> ids)
    : n_(n), periods_(periods), t0_(t0), ids_(std::move(ids)) {
    if (n < 0 || periods < 0) throw ConfigError("panel: negative dimensions");
    if (!ids_.empty() && static_cast<std::int64_t>(ids_.size()) != n)
        throw ConfigError("panel: id count does not match row count");
    y_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(periods), 0);
}

std::string PanelData::id(std::int64_t i) const {
    if (ids_.empty()) return std::to_string(i + 1);
    return ids_[static_cast<std::size_t>(i)];
}

PanelData PanelData::slice(int first, int last) const {
    if (first > last || !has_period(first) || !has_period(last))
        throw ConfigError("panel: slice [" + std::to_string(first) + ", " + std::to_string(last) +
                          "] outside the observed periods");
    PanelData out(n_, last - first + 1, first, ids_);
    for (std::int64_t i = 0; i < n_; ++i)
        for (int t = first; t <= last; ++t) out.set(i, t, at(i, t));
    return out;
}

double logit_prob(double eta, double gamma, int y_prev, double effect) {
    const double x = eta + gamma * y_prev + effect;
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double draw_fixed_effect(const DgpConfig& cfg, std::uint32_t replication, std::int64_t i) {
    if (cfg.sigma_eta_sq == 0.0) return 0.0;
    const KeyedUniform uniform(cfg.seed);
    static const boost::math::normal_distribution<double> standard;
    const double u = uniform(replication, static_cast<std::uint64_t>(i), kEffectSlot);
    return std::sqrt(cfg.sigma_eta_sq) * boost::math::quantile(standard, u);
}

PanelData simulate_panel(const ModelSpec& spec, const DgpConfig& cfg, std::uint32_t replication,
                         unsigned threads) {
    if (cfg.n_periods < 2) throw ConfigError("simulate: n_periods must be at least 2");
    if (cfg.n_individuals <= 0) throw ConfigError("simulate: n_individuals must be positive");
    if (!(cfg.sigma_eta_sq >= 0.0) || !std::isfinite(cfg.sigma_eta_sq))
        throw ConfigError("simulate: sigma_eta_sq must be a finite nonnegative number");
    if (spec.last_period() < cfg.n_periods)
        throw ConfigError("simulate: model defines fewer time effects than n_periods");

    const int periods = cfg.n_periods;
    std::vector<double> effects(static_cast<std::size_t>(periods) + 1);
    for (int t = 1; t <= periods; ++t) effects[static_cast<std::size_t>(t)] = spec.effect(t);
    const double gamma = spec.gamma();
    const KeyedUniform uniform(cfg.seed);

    PanelData panel(cfg.n_individuals, periods, 1);
    parallel_for_chunks(cfg.n_individuals, 4096, threads, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            const double eta = draw_fixed_effect(cfg, replication, i);
            std::uint8_t* y = panel.row(i);
            const auto ui = static_cast<std::uint64_t>(i);
            // Initial condition q(eta) has no lagged outcome.
            y[0] = logit_prob(eta, 0.0, 0, effects[1]) > uniform(replication, ui, 1) ? 1 : 0;
            for (int t = 2; t <= periods; ++t) {
                const double p = logit_prob(eta, gamma, y[t - 2], effects[static_cast<std::size_t>(t)]);
                y[t - 1] = p > uniform(replication, ui, static_cast<std::uint32_t>(t)) ? 1 : 0;
            }
        }
    });
    return panel;
}

}  // namespace panel_logit

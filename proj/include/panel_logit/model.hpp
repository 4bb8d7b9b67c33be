#pragma once

// Dynamic fixed-effects logit models with time effects, and the Monte Carlo
// data-generating process used to exercise the estimators.
//
// Periods are labelled 1..T throughout. The time effect of period t is
// TD_t for the dummies model and phi_coef * (t - tau) for the trend model.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace panel_logit {

struct TimeDummies {
    double gamma = 0.0;
    std::vector<double> td;  // td[0] is TD_1
};

struct TimeTrend {
    double gamma = 0.0;
    double phi_coef = 0.0;
    double tau = 0.0;
};

class ModelSpec {
public:
    ModelSpec(TimeDummies m);
    ModelSpec(TimeTrend m);

    bool is_trend() const { return std::holds_alternative<TimeTrend>(model_); }
    const TimeDummies& dummies() const { return std::get<TimeDummies>(model_); }
    const TimeTrend& trend() const { return std::get<TimeTrend>(model_); }

    double gamma() const;
    double delta() const;
    /// TD_t, or phi_coef * (t - tau).
    double effect(int t) const;
    /// Effect difference between period t and t-1 (Delta TD_t, or phi_coef).
    double effect_step(int t) const;
    /// exp(effect_step(t)).
    double phi(int t) const;
    /// Last period for which effect(t) is defined; trend models are unbounded.
    int last_period() const;

private:
    void validate() const;
    std::variant<TimeDummies, TimeTrend> model_;
};

struct DgpConfig {
    std::int64_t n_individuals = 0;
    int n_periods = 0;
    double sigma_eta_sq = 0.0;
    std::uint64_t seed = 0;
};

/// N x T binary outcomes, row-major; column c holds period t0 + c.
class PanelData {
public:
    PanelData() = default;
    PanelData(std::int64_t n, int periods, int t0, std::vector<std::string> ids = {});

    std::int64_t n() const { return n_; }
    int periods() const { return periods_; }
    int t0() const { return t0_; }
    int last_period() const { return t0_ + periods_ - 1; }
    bool has_period(int t) const { return t >= t0_ && t <= last_period(); }

    std::uint8_t at(std::int64_t i, int t) const { return y_[index(i, t)]; }
    void set(std::int64_t i, int t, std::uint8_t v) { y_[index(i, t)] = v; }
    const std::uint8_t* row(std::int64_t i) const { return y_.data() + i * periods_; }
    std::uint8_t* row(std::int64_t i) { return y_.data() + i * periods_; }

    /// Individual label; defaults to the 1-based row number.
    std::string id(std::int64_t i) const;
    const std::vector<std::string>& ids() const { return ids_; }

    /// Columns [first, last] as a new panel.
    PanelData slice(int first, int last) const;

    bool operator==(const PanelData&) const = default;

private:
    std::size_t index(std::int64_t i, int t) const {
        return static_cast<std::size_t>(i) * periods_ + static_cast<std::size_t>(t - t0_);
    }

    std::int64_t n_ = 0;
    int periods_ = 0;
    int t0_ = 1;
    std::vector<std::uint8_t> y_;
    std::vector<std::string> ids_;
};

/// exp(x) / (1 + exp(x)) with x = eta + gamma * y_prev + effect.
double logit_prob(double eta, double gamma, int y_prev, double effect);

/// Draws a panel from the model. Replication r uses an independent keyed
/// stream, so simulate_panel(spec, cfg, r) is a pure function of its inputs.
/// threads == 0 uses the default parallelism.
PanelData simulate_panel(const ModelSpec& spec, const DgpConfig& cfg, std::uint32_t replication = 0,
                         unsigned threads = 1);

/// Fixed effect of individual i in replication r.
double draw_fixed_effect(const DgpConfig& cfg, std::uint32_t replication, std::int64_t i);

}  // namespace panel_logit

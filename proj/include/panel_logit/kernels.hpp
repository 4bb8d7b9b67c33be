#pragma once

// Moment kernels on five-period outcome windows (t-3, ..., t+1).
//
// Every transformed moment function is (selector on y_{t-2}) times a linear
// combination of one kernel family (Theta or Xi) whose coefficients are
// either 1 or one of the transformed parameters alpha. The MomentDef table
// below is the single description of that structure; estimation systems,
// per-individual residuals and the rank oracle are all derived from it.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "panel_logit/model.hpp"

namespace panel_logit {

struct Window5 {
    int y_tm3 = 0;
    int y_tm2 = 0;
    int y_tm1 = 0;
    int y_t = 0;
    int y_tp1 = 0;

    /// Bit pattern y_tm3 y_tm2 y_tm1 y_t y_tp1, most significant first.
    constexpr unsigned pattern() const {
        return static_cast<unsigned>(y_tm3 << 4 | y_tm2 << 3 | y_tm1 << 2 | y_t << 1 | y_tp1);
    }
    static constexpr Window5 from_pattern(unsigned p) {
        return {static_cast<int>(p >> 4 & 1u), static_cast<int>(p >> 3 & 1u), static_cast<int>(p >> 2 & 1u),
                static_cast<int>(p >> 1 & 1u), static_cast<int>(p & 1u)};
    }
    /// Window one period earlier; its y_tm3 (period t-4) is not observed and set to 0.
    constexpr Window5 lagged() const { return {0, y_tm3, y_tm2, y_tm1, y_t}; }

    bool operator==(const Window5&) const = default;
};

inline constexpr unsigned kPatterns = 32;

using KernelVector = std::array<int, 4>;

KernelVector theta_kernels(const Window5& w);
KernelVector xi_kernels(const Window5& w);

/// Parameters entering the moment functions at window t.
struct PeriodParams {
    double delta = 0.0;    // exp(gamma) - 1
    double phi_t = 1.0;    // exp(Delta TD_t)
    double phi_tp1 = 1.0;  // exp(Delta TD_{t+1})
};

PeriodParams period_params(const ModelSpec& spec, int t);

struct GhCoefficients {
    double psi;
    double phi_big;
    double psi_star;
    double phi_big_star;
};

GhCoefficients gh_coefficients(const PeriodParams& p);

double u_minus(const Window5& w, const PeriodParams& p);
double upsilon_minus(const Window5& w, const PeriodParams& p);
/// g-form moment function; throws ConfigError on nonpositive phi.
double hbar_u(const Window5& w, const PeriodParams& p);
/// h-form moment function; throws ConfigError on nonpositive phi.
double hbar_upsilon(const Window5& w, const PeriodParams& p);

enum class Family { A, B, C };
enum class KernelKind { Theta, Xi };
/// Which value of y_{t-2} a moment function is supported on.
enum class Lag2Selector { Zero, One };

std::string_view family_name(Family f);
Family parse_family(std::string_view s);

inline constexpr int kConstantCoef = -1;

struct MomentDef {
    std::string_view name;
    KernelKind kernel;
    Lag2Selector selector;
    /// alpha index multiplying kernel component j, or kConstantCoef.
    std::array<int, 4> coef;
};

/// The four moment functions of a family, in stacking order
/// (iota, iota*, kappa, kappa*), (lambda, lambda*, mu, mu*), (rho, rho*, varsigma, varsigma*).
std::span<const MomentDef, 4> moment_defs(Family f);

int alpha_count(Family f);
std::span<const std::string_view> alpha_names(Family f);
int alpha_index(Family f, std::string_view name);

/// True transformed parameters at window t. Family C requires a trend model.
std::vector<double> alpha_from_spec(Family f, const ModelSpec& spec, int t);
std::vector<double> alpha_from_params(Family f, const PeriodParams& p);

/// Kernel expansion of moment function `which` (1..4) of family f.
double transformed_moment_row(Family f, int which, const Window5& w, std::span<const double> alpha);
double evaluate_moment(const MomentDef& def, const Window5& w, std::span<const double> alpha);

}  // namespace panel_logit

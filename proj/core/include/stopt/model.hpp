#pragma once

#include <string>
#include <vector>

namespace stopt {

/// Geometric Brownian motion driver and discounting.
/// All rates are per unit time (conventionally years); the library is
/// unit-agnostic but every rate parameter must share the same time unit.
struct MarketParams {
    double mu;     ///< drift of the price factor, per unit time
    double sigma;  ///< volatility, per sqrt(unit time)
    double rho;    ///< subjective discount rate, per unit time
};

/// Profit streams before and after the competitor shows up.
/// Post-entry, pre-competition flow:  f(x) = x - cap_k.
/// Post-competition flow:             g(x) = alpha*x - beta.
struct ProfitParams {
    double alpha;  ///< revenue fraction retained under competition, in (0, 1]
    double beta;   ///< fixed cost per unit time under competition
    double cap_k;  ///< fixed cost per unit time before competition
};

/// Incubation cost stream c(x) = cost_slope*x + cost_intercept, paid while
/// waiting to enter. The slope is named cost_slope (not "a") to avoid
/// collision with the abandonment threshold a_star.
struct CostParams {
    double cost_slope;
    double cost_intercept;
};

/// Intensities of the two exogenous exponential clocks.
struct HazardRates {
    double lambda1;  ///< early termination during incubation
    double lambda2;  ///< competitor arrival after entry
};

struct ModelParams {
    MarketParams market;
    ProfitParams profit;
    CostParams cost;
    HazardRates hazards;
};

/// Roots of (sigma^2/2) h (h-1) + mu h - (rho + lambda) = 0.
/// h1 < 0 < h2 always; h2 > 1 whenever rho + lambda > mu.
struct CharRoots {
    double lambda;  ///< hazard shift the roots were computed for
    double h1;      ///< negative root
    double h2;      ///< positive root
};

enum class IssueCode {
    range_violation,        ///< a parameter is outside its admissible range
    infinite_value_regime,  ///< rho <= mu: the firm would never exit, value is infinite
    degenerate_warning,     ///< admissible but degenerate (e.g. alpha == 0)
};

enum class Severity { error, warning };

struct ValidationIssue {
    IssueCode code;
    Severity severity;
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    /// True when no error-severity issue is present (warnings allowed).
    bool ok() const {
        for (const auto& issue : issues)
            if (issue.severity == Severity::error) return false;
        return true;
    }
    bool has_infinite_value_violation() const {
        for (const auto& issue : issues)
            if (issue.code == IssueCode::infinite_value_regime) return true;
        return false;
    }
};

/// Checks every standing assumption of the model. rho <= mu is reported as a
/// distinct infinite-value-regime violation rather than a plain range error.
/// lambda1 = lambda2 = 0 are accepted as degenerate no-risk limits.
ValidationReport validate(const ModelParams& params);

/// Closed-form characteristic roots for the hazard-shifted discount rate
/// rho + lambda. Requires sigma > 0 and lambda >= 0.
CharRoots char_roots(const MarketParams& market, double lambda);

/// g(x) = alpha*x - beta
inline double profit_post(double x, const ProfitParams& profit) {
    return profit.alpha * x - profit.beta;
}

/// f(x) = x - cap_k
inline double profit_pre(double x, const ProfitParams& profit) {
    return x - profit.cap_k;
}

/// c(x) = cost_slope*x + cost_intercept
inline double cost_incubation(double x, const CostParams& cost) {
    return cost.cost_slope * x + cost.cost_intercept;
}

/// exp(k * ln x): stable power for real exponents and positive x, used for
/// every x^k in the value functions.
double pow_pos(double x, double k);

}  // namespace stopt

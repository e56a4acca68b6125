#include "stopt/model.hpp"

#include <cmath>
#include <stdexcept>

namespace stopt {

namespace {

void require_positive(std::vector<ValidationIssue>& issues, double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        issues.push_back({IssueCode::range_violation, Severity::error, field,
                          std::string(field) + " must be positive and finite"});
    }
}

void require_nonnegative(std::vector<ValidationIssue>& issues, double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        issues.push_back({IssueCode::range_violation, Severity::error, field,
                          std::string(field) + " must be nonnegative and finite"});
    }
}

}  // namespace

ValidationReport validate(const ModelParams& params) {
    ValidationReport report;
    auto& issues = report.issues;

    require_positive(issues, params.market.sigma, "sigma");
    require_positive(issues, params.market.mu, "mu");
    require_positive(issues, params.market.rho, "rho");
    if (std::isfinite(params.market.rho) && std::isfinite(params.market.mu) &&
        params.market.rho <= params.market.mu) {
        issues.push_back({IssueCode::infinite_value_regime, Severity::error, "rho",
                          "rho <= mu: never-exit regime with infinite value"});
    }

    const double alpha = params.profit.alpha;
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
        issues.push_back({IssueCode::range_violation, Severity::error, "alpha",
                          "alpha must lie in (0, 1]"});
    } else if (alpha == 0.0) {
        issues.push_back({IssueCode::degenerate_warning, Severity::warning, "alpha",
                          "alpha = 0: revenue fully destroyed by competition"});
    }
    require_positive(issues, params.profit.beta, "beta");
    require_positive(issues, params.profit.cap_k, "cap_k");
    require_positive(issues, params.cost.cost_slope, "cost_slope");
    require_positive(issues, params.cost.cost_intercept, "cost_intercept");
    require_nonnegative(issues, params.hazards.lambda1, "lambda1");
    require_nonnegative(issues, params.hazards.lambda2, "lambda2");

    return report;
}

CharRoots char_roots(const MarketParams& market, double lambda) {
    if (!(market.sigma > 0.0)) throw std::invalid_argument("char_roots: sigma must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("char_roots: lambda must be nonnegative");
    const double s2 = market.sigma * market.sigma;
    const double half_s2_minus_mu = 0.5 * s2 - market.mu;
    const double disc = std::sqrt(half_s2_minus_mu * half_s2_minus_mu +
                                  2.0 * s2 * (market.rho + lambda));
    return CharRoots{lambda, (half_s2_minus_mu - disc) / s2, (half_s2_minus_mu + disc) / s2};
}

double pow_pos(double x, double k) {
    return std::exp(k * std::log(x));
}

}  // namespace stopt

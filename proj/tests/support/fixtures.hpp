#pragma once

#include <cstdint>

#include "stopt/model.hpp"
#include "stopt/rng.hpp"

namespace stopt::testing {

/// The worked example both figure panels share: mu=0.03, sigma=0.2, rho=0.05,
/// cost 0.1x+0.1, K=10, lambda1=0.1, lambda2=0.2, beta=7.
inline ModelParams example_params(double alpha, double beta = 7.0) {
    return ModelParams{
        MarketParams{0.03, 0.2, 0.05},
        ProfitParams{alpha, beta, 10.0},
        CostParams{0.1, 0.1},
        HazardRates{0.1, 0.2},
    };
}

/// Seeded generator of valid parameter sets for property tests.
class ParamSampler {
  public:
    explicit ParamSampler(std::uint64_t seed) : key_(rng::path_key(seed, 0)) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * rng::uniform(key_, ctr_++);
    }

    /// Broad ranges; any case can come out.
    ModelParams next() {
        ModelParams p;
        p.market.mu = uniform(0.005, 0.06);
        p.market.rho = p.market.mu + uniform(0.005, 0.05);
        p.market.sigma = uniform(0.1, 0.5);
        p.profit.alpha = uniform(0.05, 1.0);
        p.profit.beta = uniform(0.5, 15.0);
        p.profit.cap_k = uniform(0.5, 15.0);
        p.cost.cost_slope = uniform(0.02, 0.5);
        p.cost.cost_intercept = uniform(0.02, 0.5);
        p.hazards.lambda1 = uniform(0.01, 1.0);
        p.hazards.lambda2 = uniform(0.01, 1.0);
        return p;
    }

    /// Sets with cap_k > beta. The large-lambda2 limit of alpha0 converges at
    /// rate sigma/sqrt(2 lambda2), so checks against the limit at lambda2=1e5
    /// with an absolute 1e-4 tolerance need sigma kept moderate.
    ModelParams next_k_above_beta() {
        ModelParams p = next();
        p.market.sigma = uniform(0.08, 0.15);
        p.market.mu = uniform(0.01, 0.04);
        p.market.rho = p.market.mu + uniform(0.01, 0.04);
        p.profit.beta = uniform(1.0, 10.0);
        p.profit.cap_k = p.profit.beta * uniform(1.2, 2.5);
        return p;
    }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace stopt::testing

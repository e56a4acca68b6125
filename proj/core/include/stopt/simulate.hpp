#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stopt/model.hpp"

namespace stopt {

/// Which value function a simulation prices.
enum class Stage {
    post_competition,  ///< flow g until the price drops to abandon_post_at
    post_entry,        ///< flow f until abandon_pre_at or the competitor clock, then post_competition
    pre_entry,         ///< pay c(x) until cancel/enter/termination, then post_entry
};

const char* to_string(Stage s);

/// A full threshold policy. Any positive levels are allowed; the Monte Carlo
/// engine prices the policy as given, optimal or not.
struct ThresholdStrategy {
    double cancel_at;
    double enter_at;
    double abandon_pre_at;
    double abandon_post_at;
};

struct McConfig {
    long n_paths = 100000;
    double dt = 1e-3;       ///< grid spacing; crossings are detected at grid times only
    double horizon = 0.0;   ///< truncation time; <= 0 selects the default rule
    std::uint64_t seed = 0;
    bool antithetic = false;
    int threads = 0;        ///< 0 = hardware concurrency
};

/// Truncation time used when McConfig.horizon <= 0: the smallest t with
/// exp(-(rho-mu) t) < 1e-4, capped at 500 time units.
double default_horizon(const MarketParams& market);

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    long n_paths = 0;
    /// Upper bound on the discarded tail: mean over paths still alive at the
    /// horizon T of e^{-rT} (s_max X_T/(rho-mu) + q_max/rho), where
    /// |flow(x)| <= s_max x + q_max bounds every flow the stage can pay and
    /// E[X_{T+u}|X_T] = X_T e^{mu u}.
    double truncation_bound = 0.0;
};

/// Prices a threshold strategy by simulation: exact GBM increments at grid
/// times, trapezoid flow integration with e^{-rho t} discounting, clock times
/// drawn directly from exponential distributions, truncation at the horizon.
/// Identical (seed, config) inputs give bit-identical results regardless of
/// thread count.
McEstimate simulate_npv(const ModelParams& params, const ThresholdStrategy& strategy,
                        Stage stage, double x0, const McConfig& cfg);

/// Prices the same strategy from several start prices (up to 16) on shared
/// trajectories. Bit-identical to one simulate_npv call per price with the
/// same config, at a fraction of the cost.
std::vector<McEstimate> simulate_npv_many(const ModelParams& params,
                                          const ThresholdStrategy& strategy, Stage stage,
                                          std::span<const double> x0s, const McConfig& cfg);

struct StagePrice {
    Stage stage;
    double x0;
};

/// Mixed-stage batch on shared trajectories, same guarantees as
/// simulate_npv_many.
std::vector<McEstimate> simulate_npv_batch(const ModelParams& params,
                                           const ThresholdStrategy& strategy,
                                           std::span<const StagePrice> points,
                                           const McConfig& cfg);

/// One point of a cross-scenario comparison: its own flows, strategy, stage
/// and start price. The price process and the hazard clocks are shared, so
/// points from scenarios differing only in profit/cost parameters can be
/// priced on common trajectories (exact common random numbers).
struct ScenarioPoint {
    ProfitParams profit;
    CostParams cost;
    ThresholdStrategy strategy;
    Stage stage;
    double x0;
};

std::vector<McEstimate> simulate_npv_scenario_batch(const MarketParams& market,
                                                    const HazardRates& hazards,
                                                    std::span<const ScenarioPoint> points,
                                                    const McConfig& cfg);

struct KillingIdentityReport {
    McEstimate two_clock;  ///< competitor clock simulated explicitly
    McEstimate killed;     ///< deterministic extra discount lambda2, flow f + lambda2*W
    double z = 0.0;        ///< z-score of the difference of the two means
    std::string summary() const;
};

/// Estimates the pre-competition value both ways and reports the z-score of
/// the difference; the two estimators target the same expectation.
KillingIdentityReport killing_identity_check(const ModelParams& params,
                                             const ThresholdStrategy& strategy, double x0,
                                             const McConfig& cfg);

enum class ThresholdField { cancel_at, enter_at, abandon_pre_at, abandon_post_at };

const char* to_string(ThresholdField f);

struct PerturbationRow {
    double delta;         ///< relative perturbation applied
    double threshold;     ///< perturbed threshold level
    McEstimate estimate;  ///< value of the perturbed strategy
    double diff;          ///< perturbed mean - base mean (common random numbers)
    double diff_std_err;  ///< standard error of the paired per-path differences
    /// diff > 3 * diff_std_err + the two truncation bounds: the finite
    /// horizon clips both strategies, so only an excess beyond the clipped
    /// mass is evidence of genuine improvement.
    bool improved;
};

struct PerturbationReport {
    ThresholdField which;
    Stage stage;
    McEstimate base;
    std::vector<PerturbationRow> rows;
    bool any_improvement() const {
        for (const auto& r : rows)
            if (r.improved) return true;
        return false;
    }
};

/// Perturbs one threshold of the base strategy by each relative delta and
/// reprices with common random numbers (same seed, same trajectories). A row
/// is flagged when the perturbed value beats the base by more than three
/// standard errors of the paired difference. The stage simulated is the one
/// the threshold binds directly: abandon_post -> post_competition,
/// abandon_pre -> post_entry, cancel/enter -> pre_entry.
PerturbationReport perturbation_optimality(const ModelParams& params,
                                           const ThresholdStrategy& base, ThresholdField which,
                                           std::span<const double> deltas, double x0,
                                           const McConfig& cfg);

}  // namespace stopt

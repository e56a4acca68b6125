#pragma once

#include "stopt/model.hpp"

namespace stopt {

/// Closed-form solution of the post-competition abandonment problem:
/// abandon the first time the price drops to a_tilde_star, collect
/// g(x) = alpha*x - beta while above it.
///
/// Value function on the continuation region x > a_tilde_star:
///   Vtilde(x) = coeff_b1 * x^k1 + alpha*x/(rho-mu) - beta/rho
/// and 0 at or below the threshold.
struct PostExitSolution {
    double a_tilde_star;  ///< abandonment threshold, strictly below beta/alpha
    double k1;            ///< negative characteristic root at lambda = 0
    double coeff_b1;      ///< coefficient of x^k1, equals -alpha*(a~*)^(1-k1)/(k1*(rho-mu))
};

/// Requires validated params. a_tilde_star = (rho-mu)/rho * k1/(k1-1) * beta/alpha.
PostExitSolution solve_post_exit(const ModelParams& params);

/// Piecewise evaluation; throws std::invalid_argument for x <= 0.
double value_post(const PostExitSolution& sol, const ModelParams& params, double x);

/// First derivative on the continuation region (0 at and below the threshold).
double value_post_d1(const PostExitSolution& sol, const ModelParams& params, double x);

/// Second derivative on the continuation region (0 at and below the threshold).
double value_post_d2(const PostExitSolution& sol, const ModelParams& params, double x);

/// Value of the (generally suboptimal) strategy "abandon at threshold" for the
/// post-competition flow, pinned down by value matching alone:
///   W(x) = b_thr * x^k1 + alpha*x/(rho-mu) - beta/rho,  W(threshold) = 0.
/// Coincides with value_post when threshold = a_tilde_star. Used by the
/// killed-discount Monte Carlo estimator.
double value_post_at_threshold(const ModelParams& params, double threshold, double x);

}  // namespace stopt

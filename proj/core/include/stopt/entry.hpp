#pragma once

#include "stopt/model.hpp"
#include "stopt/pre_exit.hpp"

namespace stopt {

/// Incubation-period solution: cancel at c_star, enter at e_star, pay the
/// incubation cost in between. On (c_star, e_star) the value is
///   J(x) = d1*x^q1 + d2*x^q2 - cost_slope*x/(rho+l1-mu) - cost_intercept/(rho+l1),
/// it equals V(x) at and above e_star and 0 at and below c_star.
struct EntrySolution {
    double c_star;
    double e_star;
    double d1, d2;
    double q1, q2;  ///< characteristic roots at lambda1
    PreExitSolution pre;

    // diagnostics
    double max_scaled_residual;  ///< largest scaled residual of the four boundary equations
    int roots_found;             ///< distinct interior roots seen across the retry grid
    bool multiple_roots;         ///< more than one candidate; largest-psi root selected
};

/// Solves the two-sided boundary problem. For fixed (c, e) the coefficients
/// (d1, d2) solve the two value-matching equations exactly; a damped Newton
/// iteration with finite-difference Jacobian drives the two smooth-pasting
/// residuals to zero. On failure of the standard initial guess
/// (0.5 a*, 2 a*) a coarse grid of starts is tried; all distinct roots are
/// collected and the one with the larger mid-band value wins.
/// Throws NoInteriorSolutionError when no valid ordered root is found.
EntrySolution solve_entry(const ModelParams& params, const PreExitSolution& pre);

/// Piecewise value; throws std::invalid_argument for x <= 0.
double value_entry(const EntrySolution& sol, const ModelParams& params, double x);
double value_entry_d1(const EntrySolution& sol, const ModelParams& params, double x);
double value_entry_d2(const EntrySolution& sol, const ModelParams& params, double x);

}  // namespace stopt

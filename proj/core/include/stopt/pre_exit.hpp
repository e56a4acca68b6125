#pragma once

#include "stopt/model.hpp"
#include "stopt/post_exit.hpp"

namespace stopt {

/// Regime of the pre-competition abandonment problem.
/// case_i:   a_star >= a_tilde_star (competition hurts little; exit later pre-competition)
/// case_ii:  a_star <  a_tilde_star (competition hurts a lot; exit earlier pre-competition)
/// boundary: cap_k >= beta and alpha == alpha0 up to tolerance, a_star = a_tilde_star
enum class ExitCase { case_i, case_ii, boundary };

const char* to_string(ExitCase c);

/// Pre-competition abandonment solution. The value function is piecewise:
///
/// case_i / boundary, x > a_star:
///   V(x) = c1*x^p1 + v1(x)
/// case_ii:
///   V(x) = c2*x^p1 + v1(x)              for x > a_tilde_star
///   V(x) = c3*x^p1 + c4*x^p2 + v2(x)    for a_star < x <= a_tilde_star
/// and 0 at or below a_star, with particular solutions
///   v1(x) = -alpha/(k1(rho-mu)) (a~*)^(1-k1) x^k1
///           + (rho+alpha*l2-mu)/((rho+l2-mu)(rho-mu)) x - (beta*l2+rho*K)/(rho(rho+l2))
///   v2(x) = x/(rho+l2-mu) - K/(rho+l2).
struct PreExitSolution {
    ExitCase variant;
    double a_star;
    double alpha0;
    double p1, p2;  ///< characteristic roots at lambda2
    double c1;      ///< case_i / boundary coefficient of x^p1
    double c2, c3, c4;  ///< case_ii coefficients of x^p1, x^p1, x^p2

    // Scaled coefficients actually used for evaluation: powers are taken
    // relative to the threshold (x/a~*)^p or (x/a*)^p, which keeps every
    // intermediate within floating range even when |p1|, p2 are large. The
    // raw cN above equal cNs / threshold^p and can overflow for extreme
    // hazard rates; they are reported for completeness.
    double c1s;
    double c2s, c3s, c4s;
    PostExitSolution post;
};

/// Critical revenue fraction separating the two regimes.
double critical_alpha(const ModelParams& params);

/// Large-lambda2 limit of critical_alpha (finite for cap_k != beta).
double critical_alpha_limit(const ModelParams& params);

/// Default tolerance on |alpha - alpha0| inside which the boundary case is
/// returned and a_star is set to a_tilde_star exactly.
inline constexpr double kClassifyTol = 1e-9;

ExitCase classify(const ModelParams& params, double tol = kClassifyTol);

/// The function whose unique root on [a~*, inf) is a_star in case (I).
/// Unimodal with peak at h_fn_peak(params) < a_tilde_star, decreasing to -inf.
double h_fn(double x, const ModelParams& params);

/// Argmax of h_fn.
double h_fn_peak(const ModelParams& params);

/// The function whose unique root on (0, a~*) is a_star in case (II).
/// Strictly decreasing on (0, inf) with m_fn(0+) = -p1*K/(rho+lambda2) > 0.
double m_fn(double x, const ModelParams& params);

/// Solves the pre-competition abandonment problem. Throws BracketError when
/// the sign conditions contradict the classification and SolverError when a
/// coefficient cross-check fails.
PreExitSolution solve_pre_exit(const ModelParams& params);

/// Piecewise value; throws std::invalid_argument for x <= 0.
double value_pre(const PreExitSolution& sol, const ModelParams& params, double x);
double value_pre_d1(const PreExitSolution& sol, const ModelParams& params, double x);
double value_pre_d2(const PreExitSolution& sol, const ModelParams& params, double x);

}  // namespace stopt

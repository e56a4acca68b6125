#include "stopt/post_exit.hpp"

#include <cmath>
#include <stdexcept>

namespace stopt {

PostExitSolution solve_post_exit(const ModelParams& params) {
    const auto& m = params.market;
    const double k1 = char_roots(m, 0.0).h1;
    const double a_tilde =
        (m.rho - m.mu) / m.rho * k1 / (k1 - 1.0) * params.profit.beta / params.profit.alpha;
    const double coeff_b1 =
        -params.profit.alpha / (k1 * (m.rho - m.mu)) * pow_pos(a_tilde, 1.0 - k1);
    return PostExitSolution{a_tilde, k1, coeff_b1};
}

static void check_price(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("value_post: price must be positive");
}

double value_post(const PostExitSolution& sol, const ModelParams& params, double x) {
    check_price(x);
    if (x <= sol.a_tilde_star) return 0.0;
    const auto& m = params.market;
    return sol.coeff_b1 * pow_pos(x, sol.k1) + params.profit.alpha * x / (m.rho - m.mu) -
           params.profit.beta / m.rho;
}

double value_post_d1(const PostExitSolution& sol, const ModelParams& params, double x) {
    check_price(x);
    if (x <= sol.a_tilde_star) return 0.0;
    const auto& m = params.market;
    return sol.coeff_b1 * sol.k1 * pow_pos(x, sol.k1 - 1.0) +
           params.profit.alpha / (m.rho - m.mu);
}

double value_post_d2(const PostExitSolution& sol, const ModelParams& params, double x) {
    check_price(x);
    if (x <= sol.a_tilde_star) return 0.0;
    return sol.coeff_b1 * sol.k1 * (sol.k1 - 1.0) * pow_pos(x, sol.k1 - 2.0);
}

double value_post_at_threshold(const ModelParams& params, double threshold, double x) {
    check_price(x);
    if (!(threshold > 0.0))
        throw std::invalid_argument("value_post_at_threshold: threshold must be positive");
    if (x <= threshold) return 0.0;
    const auto& m = params.market;
    const double k1 = char_roots(m, 0.0).h1;
    const double perp_at_thr =
        params.profit.alpha * threshold / (m.rho - m.mu) - params.profit.beta / m.rho;
    const double b_thr = -perp_at_thr / pow_pos(threshold, k1);
    return b_thr * pow_pos(x, k1) + params.profit.alpha * x / (m.rho - m.mu) -
           params.profit.beta / m.rho;
}

}  // namespace stopt

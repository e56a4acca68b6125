#include "stopt/ode_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stopt {

double ode_residual_scan(const MarketParams& market, const SmoothFn& fn, double lo, double hi,
                         double killed_rate, const std::function<double(double)>& inflow,
                         std::span<const double> breakpoints, int n_points) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("ode_residual_scan: bad region");
    if (n_points < 2) throw std::invalid_argument("ode_residual_scan: need at least 2 points");
    for (const double bp : breakpoints)
        if (bp >= lo && bp <= hi)
            throw std::invalid_argument("ode_residual_scan: region crosses a branch boundary");

    const double rate = market.rho + killed_rate;
    const double half_s2 = 0.5 * market.sigma * market.sigma;
    const double llo = std::log(lo), lhi = std::log(hi);
    double worst = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double x = std::exp(llo + (lhi - llo) * i / (n_points - 1));
        const double t1 = -rate * fn.value(x);
        const double t2 = market.mu * x * fn.d1(x);
        const double t3 = half_s2 * x * x * fn.d2(x);
        const double t4 = inflow(x);
        const double scale = std::max({std::fabs(t1), std::fabs(t2), std::fabs(t3), std::fabs(t4),
                                       1e-300});
        worst = std::max(worst, std::fabs(t1 + t2 + t3 + t4) / scale);
    }
    return worst;
}

std::vector<BranchResidual> scan_solution_residuals(const ModelParams& params,
                                                    const EntrySolution& sol, int n_points) {
    constexpr double inset = 1e-9;
    const auto& pre = sol.pre;
    const auto& post = pre.post;
    const double l1 = params.hazards.lambda1, l2 = params.hazards.lambda2;

    std::vector<BranchResidual> out;
    auto scan = [&](const std::string& name, const SmoothFn& fn, double lo, double hi,
                    double killed, const std::function<double(double)>& inflow) {
        const double a = lo * (1.0 + inset), b = hi * (1.0 - inset);
        out.push_back({name, a, b,
                       ode_residual_scan(params.market, fn, a, b, killed, inflow, {}, n_points)});
    };

    SmoothFn vpost{[&](double x) { return value_post(post, params, x); },
                   [&](double x) { return value_post_d1(post, params, x); },
                   [&](double x) { return value_post_d2(post, params, x); }};
    scan("post_competition", vpost, post.a_tilde_star, 100.0 * post.a_tilde_star, 0.0,
         [&](double x) { return profit_post(x, params.profit); });

    SmoothFn vpre{[&](double x) { return value_pre(pre, params, x); },
                  [&](double x) { return value_pre_d1(pre, params, x); },
                  [&](double x) { return value_pre_d2(pre, params, x); }};
    auto inflow_pre = [&](double x) {
        return profit_pre(x, params.profit) + l2 * value_post(post, params, x);
    };
    if (pre.variant == ExitCase::case_ii) {
        scan("pre_competition_lower", vpre, pre.a_star, post.a_tilde_star, l2, inflow_pre);
        scan("pre_competition_upper", vpre, post.a_tilde_star, 100.0 * post.a_tilde_star, l2,
             inflow_pre);
    } else {
        scan("pre_competition", vpre, pre.a_star, 100.0 * pre.a_star, l2, inflow_pre);
    }

    SmoothFn vent{[&](double x) { return value_entry(sol, params, x); },
                  [&](double x) { return value_entry_d1(sol, params, x); },
                  [&](double x) { return value_entry_d2(sol, params, x); }};
    scan("incubation", vent, sol.c_star, sol.e_star, l1,
         [&](double x) { return -cost_incubation(x, params.cost); });
    return out;
}

}  // namespace stopt

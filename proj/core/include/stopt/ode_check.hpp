#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stopt/entry.hpp"
#include "stopt/model.hpp"
#include "stopt/post_exit.hpp"
#include "stopt/pre_exit.hpp"

namespace stopt {

/// A value function with analytic first and second derivatives.
struct SmoothFn {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

/// Maximum scaled residual of
///   -(rho + killed_rate) w + mu x w' + (sigma^2 x^2 / 2) w'' + inflow(x)
/// over a log-spaced grid of n_points in [lo, hi]. The residual at each point
/// is divided by the largest magnitude among the four terms. Regions must lie
/// inside a single smooth branch: any breakpoint inside [lo, hi] is rejected
/// with std::invalid_argument.
double ode_residual_scan(const MarketParams& market, const SmoothFn& fn, double lo, double hi,
                         double killed_rate, const std::function<double(double)>& inflow,
                         std::span<const double> breakpoints = {}, int n_points = 1000);

struct BranchResidual {
    std::string name;
    double lo, hi;
    double max_residual;
};

/// Residual scans for every continuation branch of a full solution:
/// the post-competition branch, the one or two pre-competition branches, and
/// the incubation band. Branch edges are inset by a relative epsilon.
std::vector<BranchResidual> scan_solution_residuals(const ModelParams& params,
                                                    const EntrySolution& sol,
                                                    int n_points = 1000);

}  // namespace stopt

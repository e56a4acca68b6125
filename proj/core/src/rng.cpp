#include "stopt/rng.hpp"

#include <cmath>

namespace stopt {

double inv_normal_cdf(double p) {
    static constexpr double c0 = -7.784894002430293e-03, c1 = -3.223964580411365e-01,
                            c2 = -2.400758277161838e+00, c3 = -2.549732539343734e+00,
                            c4 = 4.374664141464968e+00, c5 = 2.938163982698783e+00;
    static constexpr double d0 = 7.784695709041462e-03, d1 = 3.224671290700398e-01,
                            d2 = 2.445134137142996e+00, d3 = 3.754408661907416e+00;
    constexpr double plow = 0.02425, phigh = 1.0 - plow;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) /
               ((((d0 * q + d1) * q + d2) * q + d3) * q + 1.0);
    }
    if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) /
               ((((d0 * q + d1) * q + d2) * q + d3) * q + 1.0);
    }
    return inv_normal_cdf_central(p);
}

}  // namespace stopt

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "stopt/model.hpp"
#include "stopt/ode_check.hpp"
#include "stopt/post_exit.hpp"
#include "support/fixtures.hpp"

using namespace stopt;
using testing::ParamSampler;

TEST_CASE("abandonment threshold matches the worked example") {
    CHECK(solve_post_exit(testing::example_params(0.6)).a_tilde_star ==
          doctest::Approx(3.03).epsilon(0.005 / 3.03));
    CHECK(solve_post_exit(testing::example_params(0.3)).a_tilde_star ==
          doctest::Approx(6.06).epsilon(0.005 / 6.06));
}

TEST_CASE("threshold sits strictly below beta/alpha and scales linearly in beta") {
    ParamSampler sampler(310);
    for (int i = 0; i < 20; ++i) {
        ModelParams p = sampler.next();
        const auto sol = solve_post_exit(p);
        CHECK(sol.a_tilde_star > 0.0);
        CHECK(sol.a_tilde_star < p.profit.beta / p.profit.alpha);

        ModelParams doubled = p;
        doubled.profit.beta *= 2.0;
        CHECK(solve_post_exit(doubled).a_tilde_star ==
              doctest::Approx(2.0 * sol.a_tilde_star).epsilon(1e-12));
    }
}

TEST_CASE("value matching and smooth pasting at the threshold") {
    const auto p = testing::example_params(0.6);
    const auto sol = solve_post_exit(p);
    const double at = sol.a_tilde_star;
    CHECK(value_post(sol, p, at) == 0.0);
    CHECK(std::fabs(value_post(sol, p, at * (1 + 1e-6))) < 1e-4);
    CHECK(value_post(sol, p, at * (1 + 1e-6)) >= 0.0);
    CHECK(std::fabs(value_post_d1(sol, p, at * (1 + 1e-12))) < 1e-9);
}

TEST_CASE("value_post rejects non-positive prices") {
    const auto p = testing::example_params(0.6);
    const auto sol = solve_post_exit(p);
    CHECK_THROWS_AS(value_post(sol, p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(value_post(sol, p, -1.0), std::invalid_argument);
}

TEST_CASE("threshold monotonicity in each parameter") {
    // finite-difference version of the comparative statics: up in rho and
    // beta, down in mu, sigma, alpha
    ParamSampler sampler(311);
    const double eps = 1e-4;
    for (int i = 0; i < 12; ++i) {
        const ModelParams base = sampler.next();
        const double at = solve_post_exit(base).a_tilde_star;
        auto bump = [&](auto setter) {
            ModelParams q = base;
            setter(q);
            return solve_post_exit(q).a_tilde_star;
        };
        CHECK(bump([&](ModelParams& q) { q.market.rho += eps; }) > at);
        CHECK(bump([&](ModelParams& q) { q.profit.beta += eps; }) > at);
        CHECK(bump([&](ModelParams& q) { q.market.mu += eps; }) < at);
        CHECK(bump([&](ModelParams& q) { q.market.sigma += eps; }) < at);
        CHECK(bump([&](ModelParams& q) { q.profit.alpha += eps; }) < at);
    }
}

TEST_CASE("value function is increasing and convex above the threshold") {
    ParamSampler sampler(312);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = sampler.next();
        const auto sol = solve_post_exit(p);
        const double at = sol.a_tilde_star;
        for (int j = 0; j <= 40; ++j) {
            const double x = at * std::pow(100.0, (j + 0.5) / 41.0);
            CHECK(value_post_d1(sol, p, x) > 0.0);
            CHECK(value_post_d2(sol, p, x) > 0.0);
            // second algebraic route for the first derivative
            const double alt = p.profit.alpha / (p.market.rho - p.market.mu) *
                               (1.0 - std::pow(at / x, 1.0 - sol.k1));
            CHECK(value_post_d1(sol, p, x) == doctest::Approx(alt).epsilon(1e-11));
        }
    }
}

TEST_CASE("closed form satisfies its pricing ODE") {
    ParamSampler sampler(313);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = sampler.next();
        const auto sol = solve_post_exit(p);
        const SmoothFn fn{[&](double x) { return value_post(sol, p, x); },
                          [&](double x) { return value_post_d1(sol, p, x); },
                          [&](double x) { return value_post_d2(sol, p, x); }};
        const double lo = sol.a_tilde_star * (1 + 1e-9), hi = 100.0 * sol.a_tilde_star;
        const double worst = ode_residual_scan(
            p.market, fn, lo, hi, 0.0, [&](double x) { return profit_post(x, p.profit); });
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("far-field sensitivities of the value function") {
    // At x = 1e6 * threshold the power term is negligible; the value moves
    // with the perpetuity part: up in mu and alpha, down in rho and beta.
    ParamSampler sampler(314);
    const double eps = 1e-6;
    for (int i = 0; i < 8; ++i) {
        const ModelParams base = sampler.next();
        const auto sol = solve_post_exit(base);
        const double x = 1e6 * sol.a_tilde_star;
        const double v = value_post(sol, base, x);
        auto bumped = [&](auto setter) {
            ModelParams q = base;
            setter(q);
            return value_post(solve_post_exit(q), q, x);
        };
        CHECK(bumped([&](ModelParams& q) { q.market.mu += eps; }) > v);
        CHECK(bumped([&](ModelParams& q) { q.profit.alpha += eps; }) > v);
        CHECK(bumped([&](ModelParams& q) { q.market.rho += eps; }) < v);
        CHECK(bumped([&](ModelParams& q) { q.profit.beta += eps; }) < v);
    }
}

TEST_CASE("threshold-pinned value coincides with the optimal one at a~*") {
    const auto p = testing::example_params(0.6);
    const auto sol = solve_post_exit(p);
    for (const double x : {3.5, 5.0, 8.0, 20.0}) {
        CHECK(value_post_at_threshold(p, sol.a_tilde_star, x) ==
              doctest::Approx(value_post(sol, p, x)).epsilon(1e-12));
    }
    // and is dominated by it at other thresholds
    for (const double thr : {2.0, 2.5, 3.5, 4.5}) {
        CHECK(value_post_at_threshold(p, thr, 6.0) <= value_post(sol, p, 6.0) + 1e-12);
    }
}

#include "stopt/pre_exit.hpp"

#include <cmath>
#include <stdexcept>

#include "stopt/errors.hpp"
#include "stopt/rootfind.hpp"

namespace stopt {

const char* to_string(ExitCase c) {
    switch (c) {
        case ExitCase::case_i: return "I";
        case ExitCase::case_ii: return "II";
        case ExitCase::boundary: return "boundary";
    }
    return "?";
}

namespace {

// Everything the pre-exit formulas need, computed once.
struct Ctx {
    double mu, sigma, rho, alpha, beta, K, l2;
    double k1, p1, p2;
    double atil;       // post-competition threshold
    double atil_1mk1;  // (a~*)^(1-k1)

    explicit Ctx(const ModelParams& params) {
        mu = params.market.mu;
        sigma = params.market.sigma;
        rho = params.market.rho;
        alpha = params.profit.alpha;
        beta = params.profit.beta;
        K = params.profit.cap_k;
        l2 = params.hazards.lambda2;
        k1 = char_roots(params.market, 0.0).h1;
        const CharRoots r2 = char_roots(params.market, l2);
        p1 = r2.h1;
        p2 = r2.h2;
        atil = (rho - mu) / rho * k1 / (k1 - 1.0) * beta / alpha;
        atil_1mk1 = pow_pos(atil, 1.0 - k1);
    }

    double v1(double x) const {
        return -alpha / (k1 * (rho - mu)) * atil_1mk1 * pow_pos(x, k1) +
               (rho + alpha * l2 - mu) / (rho + l2 - mu) * x / (rho - mu) -
               (beta * l2 + rho * K) / (rho * (rho + l2));
    }
    double v1d(double x) const {
        return -alpha / (rho - mu) * atil_1mk1 * pow_pos(x, k1 - 1.0) +
               (rho + alpha * l2 - mu) / ((rho + l2 - mu) * (rho - mu));
    }
    double v2(double x) const { return x / (rho + l2 - mu) - K / (rho + l2); }
    double v2d() const { return 1.0 / (rho + l2 - mu); }

    double h(double x) const {
        return alpha * (k1 - p1) / (k1 * (rho - mu)) * atil_1mk1 * pow_pos(x, k1) +
               (rho + alpha * l2 - mu) / (rho + l2 - mu) * (p1 - 1.0) / (rho - mu) * x -
               p1 * (beta * l2 + rho * K) / (rho * (rho + l2));
    }
    double hd(double x) const {
        return alpha * (k1 - p1) / (rho - mu) * atil_1mk1 * pow_pos(x, k1 - 1.0) +
               (rho + alpha * l2 - mu) / (rho + l2 - mu) * (p1 - 1.0) / (rho - mu);
    }
    double h_scale(double x) const {
        return std::fabs(alpha * (k1 - p1) / (k1 * (rho - mu)) * atil_1mk1 * pow_pos(x, k1)) +
               std::fabs((rho + alpha * l2 - mu) / (rho + l2 - mu) * (p1 - 1.0) / (rho - mu) * x) +
               std::fabs(p1 * (beta * l2 + rho * K) / (rho * (rho + l2)));
    }

    double m_coeff() const {
        return ((p1 - k1) * rho * (rho + l2 - mu) + k1 * mu * l2 * (1.0 - p1)) /
               ((1.0 - k1) * rho * (rho + l2) * (rho + l2 - mu));
    }
    double m(double x) const {
        return m_coeff() * beta * pow_pos(x / atil, p2) + (p1 - 1.0) / (rho + l2 - mu) * x -
               p1 * K / (rho + l2);
    }
    double md(double x) const {
        return m_coeff() * beta * p2 * pow_pos(x / atil, p2) / x + (p1 - 1.0) / (rho + l2 - mu);
    }
    double m_scale(double x) const {
        return std::fabs(m_coeff() * beta * pow_pos(x / atil, p2)) +
               std::fabs((p1 - 1.0) / (rho + l2 - mu) * x) + std::fabs(p1 * K / (rho + l2));
    }
};

// Newton polish inside a known bracket; pushes |f| to the floor allowed by
// double arithmetic without leaving [lo, hi].
template <typename F, typename Fd>
double polish(F&& f, Fd&& fd, double x, double lo, double hi) {
    for (int i = 0; i < 4; ++i) {
        const double fx = f(x), dfx = fd(x);
        if (dfx == 0.0) break;
        double xn = x - fx / dfx;
        if (!(xn > lo) || !(xn < hi)) break;
        if (xn == x) break;
        x = xn;
    }
    return x;
}

}  // namespace

double critical_alpha(const ModelParams& params) {
    const auto& m = params.market;
    const double k1 = char_roots(m, 0.0).h1;
    const double l2 = params.hazards.lambda2;
    const double p1 = char_roots(m, l2).h1;
    const double K = params.profit.cap_k, beta = params.profit.beta;
    return 1.0 / (1.0 - m.rho * p1 * (k1 - 1.0) * (m.rho + l2 - m.mu) /
                            (k1 * (p1 - 1.0) * (m.rho - m.mu) * (m.rho + l2)) *
                            (1.0 - K / beta));
}

double critical_alpha_limit(const ModelParams& params) {
    const auto& m = params.market;
    const double k1 = char_roots(m, 0.0).h1;
    return 1.0 / (1.0 + m.rho * (1.0 - k1) / (k1 * (m.rho - m.mu)) *
                            (1.0 - params.profit.cap_k / params.profit.beta));
}

ExitCase classify(const ModelParams& params, double tol) {
    if (params.profit.cap_k < params.profit.beta) return ExitCase::case_ii;
    const double alpha0 = critical_alpha(params);
    const double alpha = params.profit.alpha;
    if (std::fabs(alpha - alpha0) <= tol) return ExitCase::boundary;
    return alpha > alpha0 ? ExitCase::case_i : ExitCase::case_ii;
}

double h_fn(double x, const ModelParams& params) { return Ctx(params).h(x); }

double h_fn_peak(const ModelParams& params) {
    const Ctx c(params);
    return c.atil * pow_pos((1.0 - c.p1) * (c.rho + c.alpha * c.l2 - c.mu) /
                                (c.alpha * (c.k1 - c.p1) * (c.rho + c.l2 - c.mu)),
                            1.0 / (c.k1 - 1.0));
}

double m_fn(double x, const ModelParams& params) { return Ctx(params).m(x); }

PreExitSolution solve_pre_exit(const ModelParams& params) {
    const ValidationReport report = validate(params);
    if (!report.ok()) throw std::invalid_argument("solve_pre_exit: invalid model parameters");

    const Ctx ctx(params);
    PreExitSolution sol{};
    sol.alpha0 = critical_alpha(params);
    sol.p1 = ctx.p1;
    sol.p2 = ctx.p2;
    sol.post = solve_post_exit(params);
    sol.variant = classify(params);
    sol.c1 = sol.c2 = sol.c3 = sol.c4 = 0.0;

    const double atil = ctx.atil;
    sol.c1s = sol.c2s = sol.c3s = sol.c4s = 0.0;

    if (sol.variant == ExitCase::boundary) {
        sol.a_star = atil;
        sol.c1s = -ctx.v1(atil);
        sol.c1 = sol.c1s / pow_pos(atil, ctx.p1);
    } else if (sol.variant == ExitCase::case_i) {
        // Unique root of H on [a~*, inf). H peaks below a~* and then decreases
        // to -inf, so H(a~*) >= 0 is the consistency condition.
        if (ctx.h(atil) < 0.0)
            throw BracketError("solve_pre_exit: H(a~*) < 0 contradicts case I classification");
        const double peak = h_fn_peak(params);
        if (!(peak < atil))
            throw BracketError("solve_pre_exit: H peak not below a~*");
        double hi = 2.0 * std::max(atil, peak);
        while (ctx.h(hi) > 0.0) hi *= 2.0;
        const auto root = find_root([&](double x) { return ctx.h(x); }, atil, hi, 1e-11 * atil);
        sol.a_star = polish([&](double x) { return ctx.h(x); },
                            [&](double x) { return ctx.hd(x); }, root.x, atil, hi);
        if (std::fabs(ctx.h(sol.a_star)) > 1e-12 * ctx.h_scale(sol.a_star))
            throw SolverError("solve_pre_exit: case I root residual above tolerance");
        sol.c1s = -ctx.v1(sol.a_star);
        sol.c1 = sol.c1s / pow_pos(sol.a_star, ctx.p1);
        // Smooth pasting at a_star is implied by H(a_star) = 0; cross-check,
        // scaled by the largest participating term.
        const double t1 = sol.c1s * ctx.p1 / sol.a_star;
        const double t2 = ctx.v1d(sol.a_star);
        const double sp_scale = std::max({std::fabs(t1), std::fabs(t2), 1e-30});
        if (std::fabs(t1 + t2) > 1e-9 * sp_scale)
            throw SolverError("solve_pre_exit: case I smooth-pasting cross-check failed");
    } else {
        // Unique root of the strictly decreasing M on (0, a~*); requires
        // M(a~*) < 0, which is equivalent to the case II classification.
        if (ctx.m(atil) >= 0.0)
            throw BracketError("solve_pre_exit: M(a~*) >= 0 contradicts case II classification");
        const auto root =
            find_root([&](double x) { return ctx.m(x); }, 1e-12 * atil, atil, 1e-11 * atil);
        sol.a_star = polish([&](double x) { return ctx.m(x); },
                            [&](double x) { return ctx.md(x); }, root.x, 0.0, atil);
        if (std::fabs(ctx.m(sol.a_star)) > 1e-12 * ctx.m_scale(sol.a_star))
            throw SolverError("solve_pre_exit: case II root residual above tolerance");

        // Coefficients from the boundary conditions, in scaled form. At the
        // root of M the pair (value matching, smooth pasting at a_star)
        // reduces exactly to
        //   c4s = -m_coeff * beta / (p2 - p1),
        // which avoids the catastrophic cancellation of solving the raw 2x2
        // (p1 v2(a) - a v2'(a) equals -m_coeff beta (a/a~)^p2 up to M(a*)).
        // Value matching at a_star then gives c3s, continuity at a~* gives
        // c2s, and the C1-pasting equation at a~* is the cross-check; it
        // holds exactly when a_star is the root of M.
        const double a = sol.a_star;
        const double p1 = ctx.p1, p2 = ctx.p2;
        const double ratio = a / atil;
        const double r_p1 = pow_pos(ratio, p1);
        const double r_p2 = pow_pos(ratio, p2);
        sol.c4s = -ctx.m_coeff() * ctx.beta / (p2 - p1);
        sol.c3s = -(ctx.v2(a) + sol.c4s * r_p2) / r_p1;
        sol.c2s = sol.c3s + sol.c4s + ctx.v2(atil) - ctx.v1(atil);

        const double sp1 = sol.c3s * p1 * r_p1 / a;
        const double sp2 = sol.c4s * p2 * r_p2 / a;
        const double sp3 = ctx.v2d();
        const double sp_scale = std::max({std::fabs(sp1), std::fabs(sp2), std::fabs(sp3), 1e-30});
        if (std::fabs(sp1 + sp2 + sp3) > 1e-9 * sp_scale)
            throw SolverError("solve_pre_exit: case II smooth-pasting cross-check failed");

        const double d1 = sol.c3s * p1 / atil;
        const double d2 = sol.c4s * p2 / atil;
        const double d3 = ctx.v2d();
        const double d4 = sol.c2s * p1 / atil;
        const double d5 = ctx.v1d(atil);
        const double c1_scale = std::max({std::fabs(d1), std::fabs(d2), std::fabs(d3),
                                          std::fabs(d4), std::fabs(d5), 1e-30});
        if (std::fabs(d1 + d2 + d3 - d4 - d5) > 1e-9 * c1_scale)
            throw SolverError("solve_pre_exit: case II C1-pasting cross-check failed");

        sol.c2 = sol.c2s / pow_pos(atil, p1);
        sol.c3 = sol.c3s / pow_pos(atil, p1);
        sol.c4 = sol.c4s / pow_pos(atil, p2);
    }
    return sol;
}

namespace {

void check_price_pre(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("value_pre: price must be positive");
}

}  // namespace

double value_pre(const PreExitSolution& sol, const ModelParams& params, double x) {
    check_price_pre(x);
    if (x <= sol.a_star) return 0.0;
    const Ctx ctx(params);
    if (sol.variant == ExitCase::case_ii && x <= ctx.atil)
        return sol.c3s * pow_pos(x / ctx.atil, sol.p1) + sol.c4s * pow_pos(x / ctx.atil, sol.p2) +
               ctx.v2(x);
    if (sol.variant == ExitCase::case_ii)
        return sol.c2s * pow_pos(x / ctx.atil, sol.p1) + ctx.v1(x);
    return sol.c1s * pow_pos(x / sol.a_star, sol.p1) + ctx.v1(x);
}

double value_pre_d1(const PreExitSolution& sol, const ModelParams& params, double x) {
    check_price_pre(x);
    if (x <= sol.a_star) return 0.0;
    const Ctx ctx(params);
    if (sol.variant == ExitCase::case_ii && x <= ctx.atil)
        return sol.c3s * sol.p1 * pow_pos(x / ctx.atil, sol.p1) / x +
               sol.c4s * sol.p2 * pow_pos(x / ctx.atil, sol.p2) / x + ctx.v2d();
    if (sol.variant == ExitCase::case_ii)
        return sol.c2s * sol.p1 * pow_pos(x / ctx.atil, sol.p1) / x + ctx.v1d(x);
    return sol.c1s * sol.p1 * pow_pos(x / sol.a_star, sol.p1) / x + ctx.v1d(x);
}

double value_pre_d2(const PreExitSolution& sol, const ModelParams& params, double x) {
    check_price_pre(x);
    if (x <= sol.a_star) return 0.0;
    const Ctx ctx(params);
    const double k1 = ctx.k1;
    const double v1dd = -ctx.alpha * (k1 - 1.0) / (ctx.rho - ctx.mu) * ctx.atil_1mk1 *
                        pow_pos(x, k1 - 2.0);
    const double p1 = sol.p1, p2 = sol.p2;
    if (sol.variant == ExitCase::case_ii && x <= ctx.atil)
        return sol.c3s * p1 * (p1 - 1.0) * pow_pos(x / ctx.atil, p1) / (x * x) +
               sol.c4s * p2 * (p2 - 1.0) * pow_pos(x / ctx.atil, p2) / (x * x);
    if (sol.variant == ExitCase::case_ii)
        return sol.c2s * p1 * (p1 - 1.0) * pow_pos(x / ctx.atil, p1) / (x * x) + v1dd;
    return sol.c1s * p1 * (p1 - 1.0) * pow_pos(x / sol.a_star, p1) / (x * x) + v1dd;
}

}  // namespace stopt

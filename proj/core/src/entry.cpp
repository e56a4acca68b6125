#include "stopt/entry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stopt/errors.hpp"

namespace stopt {

namespace {

struct EntryCtx {
    const ModelParams& params;
    const PreExitSolution& pre;
    double q1, q2;
    double lin_a;  // cost_slope/(rho+l1-mu)
    double lin_b;  // cost_intercept/(rho+l1)

    EntryCtx(const ModelParams& p, const PreExitSolution& pr) : params(p), pre(pr) {
        const CharRoots r = char_roots(p.market, p.hazards.lambda1);
        q1 = r.h1;
        q2 = r.h2;
        lin_a = p.cost.cost_slope / (p.market.rho + p.hazards.lambda1 - p.market.mu);
        lin_b = p.cost.cost_intercept / (p.market.rho + p.hazards.lambda1);
    }

    struct Coeffs { double d1, d2; bool ok; };

    // ce1 and ce3 are linear in (d1, d2) once (c, e) are fixed.
    Coeffs coeffs(double c, double e) const {
        const double m11 = pow_pos(c, q1), m12 = pow_pos(c, q2);
        const double m21 = pow_pos(e, q1), m22 = pow_pos(e, q2);
        const double r1 = lin_a * c + lin_b;
        const double r2 = value_pre(pre, params, e) + lin_a * e + lin_b;
        const double det = m11 * m22 - m12 * m21;
        if (det == 0.0 || !std::isfinite(det)) return {0.0, 0.0, false};
        return {(r1 * m22 - m12 * r2) / det, (m11 * r2 - r1 * m21) / det, true};
    }

    // Scaled smooth-pasting residuals at c (ce2) and e (ce4).
    bool residuals(double c, double e, double out[2]) const {
        const Coeffs dd = coeffs(c, e);
        if (!dd.ok) return false;
        const double vpe = value_pre_d1(pre, params, e);
        const double scale = std::max(1.0, std::fabs(vpe));
        out[0] = (dd.d1 * q1 * pow_pos(c, q1 - 1.0) + dd.d2 * q2 * pow_pos(c, q2 - 1.0) - lin_a) /
                 scale;
        out[1] = (dd.d1 * q1 * pow_pos(e, q1 - 1.0) + dd.d2 * q2 * pow_pos(e, q2 - 1.0) - lin_a -
                  vpe) /
                 scale;
        return std::isfinite(out[0]) && std::isfinite(out[1]);
    }
};

struct Candidate { double c, e; };

// Damped Newton with finite-difference Jacobian on the two pasting residuals.
bool newton_2d(const EntryCtx& ctx, double c, double e, Candidate& out) {
    const int max_iter = 200;
    double f[2];
    if (!ctx.residuals(c, e, f)) return false;
    for (int iter = 0; iter < max_iter; ++iter) {
        double norm = std::hypot(f[0], f[1]);
        const double hc = 1e-7 * c, he = 1e-7 * e;
        double fc[2], fe[2];
        if (!ctx.residuals(c + hc, e, fc) || !ctx.residuals(c, e + he, fe)) return false;
        const double j11 = (fc[0] - f[0]) / hc, j12 = (fe[0] - f[0]) / he;
        const double j21 = (fc[1] - f[1]) / hc, j22 = (fe[1] - f[1]) / he;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double dc = -(f[0] * j22 - f[1] * j12) / det;
        const double de = -(f[1] * j11 - f[0] * j21) / det;

        double t = 1.0;
        double cn = c, en = e, fn[2];
        bool stepped = false;
        for (int bt = 0; bt < 40; ++bt) {
            cn = c + t * dc;
            en = e + t * de;
            if (cn > 0.0 && en > cn && ctx.residuals(cn, en, fn) &&
                std::hypot(fn[0], fn[1]) < norm) {
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if (!stepped) return false;
        c = cn; e = en; f[0] = fn[0]; f[1] = fn[1];
        if (std::fabs(t * dc) < 1e-12 * std::max(1.0, std::fabs(c)) &&
            std::fabs(t * de) < 1e-12 * std::max(1.0, std::fabs(e))) {
            out = {c, e};
            return std::hypot(f[0], f[1]) < 1e-9;
        }
    }
    return false;
}

double mid_band_value(const EntryCtx& ctx, const Candidate& cand) {
    const auto dd = ctx.coeffs(cand.c, cand.e);
    const double x = 0.5 * (cand.c + cand.e);
    return dd.d1 * pow_pos(x, ctx.q1) + dd.d2 * pow_pos(x, ctx.q2) - ctx.lin_a * x - ctx.lin_b;
}

}  // namespace

EntrySolution solve_entry(const ModelParams& params, const PreExitSolution& pre) {
    const EntryCtx ctx(params, pre);
    const double a = pre.a_star;

    std::vector<Candidate> roots;
    auto note_root = [&](const Candidate& cand) {
        for (const auto& r : roots)
            if (std::fabs(r.c - cand.c) < 1e-6 * std::max(1.0, r.c) &&
                std::fabs(r.e - cand.e) < 1e-6 * std::max(1.0, r.e))
                return;
        roots.push_back(cand);
    };

    Candidate cand;
    if (newton_2d(ctx, 0.5 * a, 2.0 * a, cand)) note_root(cand);

    // Coarse retry grid spanning the region where the band is observed to sit.
    static const double c_fracs[] = {0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9};
    static const double e_mults[] = {1.2, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0};
    for (double cf : c_fracs)
        for (double em : e_mults)
            if (newton_2d(ctx, cf * a, em * a, cand)) note_root(cand);

    if (roots.empty())
        throw NoInteriorSolutionError(
            "solve_entry: no interior (c*, e*) root found from any initial guess");

    // More than one distinct root: keep the one with the larger mid-band value.
    std::size_t best = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (mid_band_value(ctx, roots[i]) > mid_band_value(ctx, roots[best])) best = i;

    EntrySolution sol{};
    sol.c_star = roots[best].c;
    sol.e_star = roots[best].e;
    sol.q1 = ctx.q1;
    sol.q2 = ctx.q2;
    sol.pre = pre;
    const auto dd = ctx.coeffs(sol.c_star, sol.e_star);
    sol.d1 = dd.d1;
    sol.d2 = dd.d2;
    double f[2];
    ctx.residuals(sol.c_star, sol.e_star, f);
    sol.max_scaled_residual = std::max(std::fabs(f[0]), std::fabs(f[1]));
    sol.roots_found = static_cast<int>(roots.size());
    sol.multiple_roots = roots.size() > 1;
    if (!(sol.c_star < sol.e_star))
        throw SolverError("solve_entry: ordering c* < e* violated by selected root");
    return sol;
}

namespace {
void check_price_entry(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("value_entry: price must be positive");
}
}  // namespace

double value_entry(const EntrySolution& sol, const ModelParams& params, double x) {
    check_price_entry(x);
    if (x >= sol.e_star) return value_pre(sol.pre, params, x);
    if (x <= sol.c_star) return 0.0;
    const double lin_a = params.cost.cost_slope / (params.market.rho + params.hazards.lambda1 - params.market.mu);
    const double lin_b = params.cost.cost_intercept / (params.market.rho + params.hazards.lambda1);
    return sol.d1 * pow_pos(x, sol.q1) + sol.d2 * pow_pos(x, sol.q2) - lin_a * x - lin_b;
}

double value_entry_d1(const EntrySolution& sol, const ModelParams& params, double x) {
    check_price_entry(x);
    if (x >= sol.e_star) return value_pre_d1(sol.pre, params, x);
    if (x <= sol.c_star) return 0.0;
    const double lin_a = params.cost.cost_slope / (params.market.rho + params.hazards.lambda1 - params.market.mu);
    return sol.d1 * sol.q1 * pow_pos(x, sol.q1 - 1.0) + sol.d2 * sol.q2 * pow_pos(x, sol.q2 - 1.0) -
           lin_a;
}

double value_entry_d2(const EntrySolution& sol, const ModelParams& params, double x) {
    check_price_entry(x);
    if (x >= sol.e_star) return value_pre_d2(sol.pre, params, x);
    if (x <= sol.c_star) return 0.0;
    return sol.d1 * sol.q1 * (sol.q1 - 1.0) * pow_pos(x, sol.q1 - 2.0) +
           sol.d2 * sol.q2 * (sol.q2 - 1.0) * pow_pos(x, sol.q2 - 2.0);
}

}  // namespace stopt

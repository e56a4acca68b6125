#include "stopt_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stopt/entry.hpp"
#include "stopt/errors.hpp"
#include "stopt/ode_check.hpp"
#include "stopt/post_exit.hpp"
#include "stopt/pre_exit.hpp"
#include "stopt/simulate.hpp"

namespace stopt::cli {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    // our fields never contain commas/quotes/newlines; keep them verbatim
    return s;
}

}  // namespace

ResultRow solve_row(const ModelParams& params) {
    ResultRow row;
    const ValidationReport report = validate(params);
    for (const auto& issue : report.issues) {
        if (issue.severity == Severity::warning) {
            if (!row.warnings.empty()) row.warnings += ";";
            row.warnings += issue.field + ": " + issue.message;
        }
    }
    if (!report.ok()) {
        row.error = report.has_infinite_value_violation() ? "infinite-value regime (rho <= mu)"
                                                          : "validation failed";
        for (const auto& issue : report.issues)
            if (issue.severity == Severity::error) {
                row.error += "; " + issue.message;
                break;
            }
        return row;
    }
    try {
        const PreExitSolution pre = solve_pre_exit(params);
        row.case_tag = to_string(pre.variant);
        row.a_tilde_star = pre.post.a_tilde_star;
        row.alpha0 = pre.alpha0;
        row.a_star = pre.a_star;
        const EntrySolution entry = solve_entry(params, pre);
        row.c_star = entry.c_star;
        row.e_star = entry.e_star;
        row.entry_residual = entry.max_scaled_residual;
        if (entry.multiple_roots) {
            if (!row.warnings.empty()) row.warnings += ";";
            row.warnings += "entry: " + std::to_string(entry.roots_found) +
                            " distinct roots, largest mid-band value selected";
        }
    } catch (const SolverError& e) {
        row.error = e.what();
    }
    return row;
}

std::vector<std::string> result_columns() {
    return {"sweep_parameter", "sweep_value", "case", "a_tilde_star", "alpha0",
            "a_star", "c_star", "e_star", "entry_residual", "warnings", "error"};
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    const auto cols = result_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rows) {
        os << csv_escape(r.sweep_parameter) << ",";
        os << (r.sweep_parameter.empty() ? "" : fmt(r.sweep_value)) << ",";
        os << csv_escape(r.case_tag) << "," << fmt(r.a_tilde_star) << "," << fmt(r.alpha0) << ","
           << fmt(r.a_star) << "," << fmt(r.c_star) << "," << fmt(r.e_star) << ","
           << fmt(r.entry_residual) << "," << csv_escape(r.warnings) << ","
           << csv_escape(r.error) << "\n";
    }
}

void write_rows_json(std::ostream& os, const std::vector<ResultRow>& rows) {
    auto num = [](double v) { return std::isnan(v) ? std::string("null") : fmt(v); };
    os << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << "  {\"sweep_parameter\": \"" << r.sweep_parameter << "\", ";
        os << "\"sweep_value\": " << (r.sweep_parameter.empty() ? "null" : num(r.sweep_value))
           << ", ";
        os << "\"case\": \"" << r.case_tag << "\", ";
        os << "\"a_tilde_star\": " << num(r.a_tilde_star) << ", ";
        os << "\"alpha0\": " << num(r.alpha0) << ", ";
        os << "\"a_star\": " << num(r.a_star) << ", ";
        os << "\"c_star\": " << num(r.c_star) << ", ";
        os << "\"e_star\": " << num(r.e_star) << ", ";
        os << "\"entry_residual\": " << num(r.entry_residual) << ", ";
        os << "\"warnings\": \"" << r.warnings << "\", ";
        os << "\"error\": \"" << r.error << "\"}";
        os << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    os << "]\n";
}

std::vector<ResultRow> read_rows_csv(std::istream& is) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;  // header
    auto parse_num = [](const std::string& s) {
        return s.empty() || s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    };
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                f.push_back(line.substr(start));
                break;
            }
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (f.size() != 11) throw std::runtime_error("read_rows_csv: malformed row");
        ResultRow r;
        r.sweep_parameter = f[0];
        r.sweep_value = parse_num(f[1]);
        r.case_tag = f[2];
        r.a_tilde_star = parse_num(f[3]);
        r.alpha0 = parse_num(f[4]);
        r.a_star = parse_num(f[5]);
        r.c_star = parse_num(f[6]);
        r.e_star = parse_num(f[7]);
        r.entry_residual = parse_num(f[8]);
        r.warnings = f[9];
        r.error = f[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct OutStream {
    std::ofstream file;
    std::ostream* os;
    OutStream(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os = &fallback;
        } else {
            file.open(path);
            if (!file) throw std::runtime_error("cannot open output file: " + path);
            os = &file;
        }
    }
};

int exit_code_for(const ResultRow& row) {
    if (row.error.empty()) return exit_ok;
    if (row.error.find("alidation") != std::string::npos ||
        row.error.find("infinite-value") != std::string::npos)
        return exit_validation_failure;
    return exit_solver_failure;
}

}  // namespace

int cmd_solve(const CommandOptions& opt, std::ostream& os_out, std::ostream& err) {
    OutStream out(opt.out_path, os_out);
    const ResultRow row = solve_row(opt.scenario.params);
    std::vector<ResultRow> rows{row};
    if (opt.format == OutputFormat::json) {
        write_rows_json(*out.os, rows);
    } else {
        write_rows_csv(*out.os, rows);
    }
    const int code = exit_code_for(row);
    if (code != exit_ok) {
        err << "error: " << row.error << "\n";
        return code;
    }

    if (opt.grid.n > 0 && opt.format == OutputFormat::csv) {
        const auto& params = opt.scenario.params;
        const PreExitSolution pre = solve_pre_exit(params);
        const EntrySolution entry = solve_entry(params, pre);
        double lo = opt.grid.min > 0.0 ? opt.grid.min : 0.5 * entry.c_star;
        double hi = opt.grid.max > lo ? opt.grid.max : 2.0 * entry.e_star;
        *out.os << "\nx,v_post,v_pre,psi\n";
        for (int i = 0; i < opt.grid.n; ++i) {
            const double t = opt.grid.n == 1 ? 0.0 : static_cast<double>(i) / (opt.grid.n - 1);
            const double x = lo * std::pow(hi / lo, t);
            *out.os << fmt(x) << "," << fmt(value_post(pre.post, params, x)) << ","
                    << fmt(value_pre(pre, params, x)) << "," << fmt(value_entry(entry, params, x))
                    << "\n";
        }
    }
    return exit_ok;
}

int cmd_sweep(const CommandOptions& opt, std::ostream& os_out, std::ostream& err) {
    OutStream out(opt.out_path, os_out);
    if (!opt.scenario.sweep) {
        err << "error: sweep requires a [sweep] section or --set sweep.parameter=...\n";
        return exit_validation_failure;
    }
    const SweepSpec& sweep = *opt.scenario.sweep;
    std::vector<ResultRow> rows;
    for (const double v : sweep.values) {
        ModelParams params = opt.scenario.params;
        *model_field(params, sweep.parameter) = v;
        ResultRow row = solve_row(params);
        row.sweep_parameter = sweep.parameter;
        row.sweep_value = v;
        rows.push_back(std::move(row));
    }
    if (opt.format == OutputFormat::json) write_rows_json(*out.os, rows);
    else write_rows_csv(*out.os, rows);
    return exit_ok;  // per-point failures are recorded in-row
}

namespace {

struct CheckSink {
    std::ostream& os;
    int failures = 0;
    void check(bool ok, const std::string& label, const std::string& detail) {
        os << (ok ? "[PASS] " : "[FAIL] ") << label;
        if (!detail.empty()) os << ": " << detail;
        os << "\n";
        if (!ok) ++failures;
    }
};

}  // namespace

int cmd_verify(const CommandOptions& opt, std::ostream& os_out, std::ostream& err) {
    OutStream out(opt.out_path, os_out);
    std::ostream& os = *out.os;
    const ScenarioFile& sc = opt.scenario;
    const ModelParams& params = sc.params;

    const ValidationReport vr = validate(params);
    if (!vr.ok()) {
        err << "error: scenario does not validate\n";
        return exit_validation_failure;
    }
    PreExitSolution pre;
    EntrySolution entry;
    try {
        pre = solve_pre_exit(params);
        entry = solve_entry(params, pre);
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return exit_solver_failure;
    }

    CheckSink sink{os};
    char buf[256];

    // analytic thresholds, possibly corrupted through verify.* overrides
    ThresholdStrategy strat{entry.c_star, entry.e_star, pre.a_star, pre.post.a_tilde_star};
    bool corrupted = false;
    if (sc.override_cancel) { strat.cancel_at = *sc.override_cancel; corrupted = true; }
    if (sc.override_enter) { strat.enter_at = *sc.override_enter; corrupted = true; }
    if (sc.override_abandon_pre) { strat.abandon_pre_at = *sc.override_abandon_pre; corrupted = true; }
    if (sc.override_abandon_post) { strat.abandon_post_at = *sc.override_abandon_post; corrupted = true; }
    if (corrupted) os << "note: thresholds overridden, verifying a non-analytic strategy\n";

    // 1. boundary conditions of the analytic solution
    {
        const double tol = 1e-8;
        const double v_at_a = value_pre(pre, params, pre.a_star * (1 + 1e-12));
        sink.check(std::fabs(v_at_a) <= tol, "value-matching V(a*) = 0", fmt(v_at_a));
        const double vp_at_a = value_pre_d1(pre, params, pre.a_star * (1 + 1e-12));
        sink.check(std::fabs(vp_at_a) <= tol * std::max(1.0, std::fabs(vp_at_a)),
                   "smooth-pasting V'(a*) = 0", fmt(vp_at_a));
        const double psi_c = value_entry(entry, params, entry.c_star * (1 + 1e-12));
        sink.check(std::fabs(psi_c) <= tol, "value-matching psi(c*) = 0", fmt(psi_c));
        const double psi_e = value_entry(entry, params, entry.e_star * (1 - 1e-12)) -
                             value_pre(pre, params, entry.e_star);
        sink.check(std::fabs(psi_e) <= tol * std::max(1.0, value_pre(pre, params, entry.e_star)),
                   "value-matching psi(e*) = V(e*)", fmt(psi_e));
        sink.check(entry.max_scaled_residual < 1e-9, "entry system residuals",
                   fmt(entry.max_scaled_residual));
    }

    // 2. killed-ODE residuals on every branch
    for (const auto& branch : scan_solution_residuals(params, entry)) {
        std::snprintf(buf, sizeof buf, "ode residual %s [%g, %g]", branch.name.c_str(), branch.lo,
                      branch.hi);
        sink.check(branch.max_residual < 1e-8, buf, fmt(branch.max_residual));
    }

    // 3. Monte Carlo agreement at the test prices
    McConfig cfg = sc.mc.config;
    std::vector<double> prices = sc.mc.x0;
    if (prices.empty())
        prices = {0.5 * (entry.c_star + entry.e_star), 1.4 * pre.a_star,
                  1.4 * pre.post.a_tilde_star};
    for (const double x0 : prices) {
        struct StageCase {
            Stage stage;
            double analytic;
        } cases[] = {
            {Stage::post_competition, value_post(pre.post, params, x0)},
            {Stage::post_entry, value_pre(pre, params, x0)},
            {Stage::pre_entry, value_entry(entry, params, x0)},
        };
        for (const auto& c : cases) {
            const McEstimate est = simulate_npv(params, strat, c.stage, x0, cfg);
            const double gap = std::fabs(c.analytic - est.mean);
            // the truncation bound is part of the estimate's contract: the
            // discarded tail can move the mean by at most that much
            const bool ok = gap <= 3.0 * est.std_err + est.truncation_bound + 1e-12;
            std::snprintf(buf, sizeof buf, "mc agreement %s x0=%g", to_string(c.stage), x0);
            sink.check(ok || corrupted, buf,
                       "analytic " + fmt(c.analytic) + " mc " + fmt(est.mean) + " se " +
                           fmt(est.std_err) + " trunc " + fmt(est.truncation_bound));
        }
    }

    // 4. killing identity
    {
        const double x0 = prices.front();
        const KillingIdentityReport rep = killing_identity_check(params, strat, x0, cfg);
        std::snprintf(buf, sizeof buf, "killing identity x0=%g", x0);
        sink.check(std::fabs(rep.z) < 4.0, buf, rep.summary());
    }

    // 5. perturbation optimality
    {
        static const double deltas[] = {-0.10, -0.05, 0.05, 0.10};
        const ThresholdField fields[] = {ThresholdField::abandon_post_at,
                                         ThresholdField::abandon_pre_at, ThresholdField::cancel_at,
                                         ThresholdField::enter_at};
        const double x0s[] = {1.3 * strat.abandon_post_at, 1.3 * strat.abandon_pre_at,
                              0.5 * (strat.cancel_at + strat.enter_at),
                              0.5 * (strat.cancel_at + strat.enter_at)};
        for (std::size_t i = 0; i < 4; ++i) {
            const PerturbationReport rep =
                perturbation_optimality(params, strat, fields[i], deltas, x0s[i], cfg);
            std::string detail;
            for (const auto& row : rep.rows) {
                detail += fmt(row.delta) + ":" + fmt(row.diff) + "(se " + fmt(row.diff_std_err) +
                          ") ";
            }
            std::snprintf(buf, sizeof buf, "perturbation %s x0=%g", to_string(fields[i]), x0s[i]);
            sink.check(!rep.any_improvement(), buf, detail);
        }
    }

    os << (sink.failures == 0 ? "verification passed" : "verification FAILED") << " ("
       << sink.failures << " failing checks)\n";
    return sink.failures == 0 ? exit_ok : exit_verification_failure;
}

}  // namespace stopt::cli

#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stopt_cli/scenario.hpp"

namespace stopt::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_validation_failure = 2,
    exit_solver_failure = 3,
    exit_verification_failure = 4,
};

enum class OutputFormat { csv, json };

/// One solved scenario (or sweep point). Numeric fields are NaN when the
/// solve failed; the error column then carries the reason.
struct ResultRow {
    std::string sweep_parameter;  // empty when not sweeping
    double sweep_value = std::numeric_limits<double>::quiet_NaN();
    std::string case_tag;
    double a_tilde_star = std::numeric_limits<double>::quiet_NaN();
    double alpha0 = std::numeric_limits<double>::quiet_NaN();
    double a_star = std::numeric_limits<double>::quiet_NaN();
    double c_star = std::numeric_limits<double>::quiet_NaN();
    double e_star = std::numeric_limits<double>::quiet_NaN();
    double entry_residual = std::numeric_limits<double>::quiet_NaN();
    std::string warnings;  // semicolon-separated
    std::string error;     // empty on success
};

/// Solves one parameter set into a row; catches solver errors into the row.
ResultRow solve_row(const ModelParams& params);

/// Stable column set shared by the CSV and JSON emitters.
std::vector<std::string> result_columns();
void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_rows_json(std::ostream& os, const std::vector<ResultRow>& rows);

/// Parses a CSV produced by write_rows_csv back into rows (used by the
/// round-trip tests and downstream tooling).
std::vector<ResultRow> read_rows_csv(std::istream& is);

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    int n = 0;  // 0: no value-function table
};

struct CommandOptions {
    ScenarioFile scenario;
    OutputFormat format = OutputFormat::csv;
    std::string out_path;  // empty: stdout
    GridSpec grid;
};

int cmd_solve(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_sweep(const CommandOptions& opt, std::ostream& os, std::ostream& err);
int cmd_verify(const CommandOptions& opt, std::ostream& os, std::ostream& err);

}  // namespace stopt::cli

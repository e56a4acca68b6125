#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stopt/model.hpp"
#include "stopt/simulate.hpp"

namespace stopt::cli {

/// One sweep specification: a model parameter name and the grid to scan.
struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

/// Scenario-file Monte Carlo block plus the verification test prices.
struct McBlock {
    McConfig config;
    std::vector<double> x0;  ///< test prices for cmd_verify (empty: auto-chosen)
};

/// Parsed scenario: flat model keys, optional [sweep] and [mc] sections, and
/// optional verify.* threshold overrides used to inject corrupted thresholds.
struct ScenarioFile {
    ModelParams params{};
    std::optional<SweepSpec> sweep;
    McBlock mc{};
    std::optional<double> override_cancel, override_enter, override_abandon_pre,
        override_abandon_post;
};

/// Parses the key = value scenario format. Throws std::runtime_error with a
/// line-numbered message on malformed input or unknown keys.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::string& path);

/// Applies one --set override, e.g. "alpha=0.45", "mc.n_paths=50000",
/// "sweep.parameter=lambda2" or "verify.abandon_post_at=9".
void apply_override(ScenarioFile& scenario, const std::string& key_value);

/// Model parameter names accepted as flat keys and sweep parameters.
bool is_model_key(const std::string& key);
double* model_field(ModelParams& params, const std::string& key);

}  // namespace stopt::cli

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "stopt_cli/commands.hpp"
#include "stopt_cli/scenario.hpp"

using namespace stopt::cli;

int main(int argc, char** argv) {
    CLI::App app{"stopt: optimal market-entry/exit thresholds for a startup under "
                 "early-termination and competition risk"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::vector<std::string> sets;
    std::string out_path;
    std::string format = "csv";
    GridSpec grid;
    long paths_override = 0;
    double dt_override = 0.0;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario file path");
        cmd->add_option("--set", sets, "override key=value (repeatable)");
        cmd->add_option("--out", out_path, "write output to file instead of stdout");
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", seed_override, "Monte Carlo seed override");
        cmd->add_option("--paths", paths_override, "Monte Carlo path-count override");
        cmd->add_option("--dt", dt_override, "Monte Carlo time-step override");
        return cmd;
    };

    CLI::App* solve = add_common(app.add_subcommand("solve", "solve one scenario"));
    solve->add_option("--grid-min", grid.min, "value-function table lower price");
    solve->add_option("--grid-max", grid.max, "value-function table upper price");
    solve->add_option("--grid-n", grid.n, "value-function table size (0 = off)");
    CLI::App* sweep = add_common(app.add_subcommand("sweep", "sweep one parameter"));
    CLI::App* verify = add_common(app.add_subcommand("verify", "run the verification suite"));

    CLI11_PARSE(app, argc, argv);

    CommandOptions opt;
    try {
        opt.scenario = scenario_path.empty() ? ScenarioFile{} : load_scenario(scenario_path);
        for (const auto& kv : sets) apply_override(opt.scenario, kv);
        if (seed_override >= 0)
            opt.scenario.mc.config.seed = static_cast<std::uint64_t>(seed_override);
        if (paths_override > 0) opt.scenario.mc.config.n_paths = paths_override;
        if (dt_override > 0.0) opt.scenario.mc.config.dt = dt_override;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation_failure;
    }
    opt.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
    opt.out_path = out_path;
    opt.grid = grid;

    try {
        if (solve->parsed()) return cmd_solve(opt, std::cout, std::cerr);
        if (sweep->parsed()) return cmd_sweep(opt, std::cout, std::cerr);
        if (verify->parsed()) return cmd_verify(opt, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_solver_failure;
    }
    return exit_ok;
}

#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mortal/experiments.hpp"

namespace mortal {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

namespace detail {

inline void print_scenarios(std::ostream& out) {
    for (const auto& s : builtin_scenarios()) out << "  " << s.name << "  " << s.summary << '\n';
}

inline ScenarioConfig resolve_config(const std::string& scenario, const std::string& config_path,
                                     std::ostream& err) {
    if (!scenario.empty() && !config_path.empty()) throw ConfigError("give either --scenario or --config, not both");
    if (!config_path.empty()) return load_config(config_path);
    if (scenario.empty()) throw ConfigError("one of --scenario or --config is required");
    if (auto cfg = builtin_config(scenario)) return *cfg;
    err << "unknown scenario '" << scenario << "'; built-in scenarios:\n";
    print_scenarios(err);
    throw ConfigError("unknown scenario '" + scenario + "'");
}

}  // namespace detail

/// Entry point of the `mortal_agents` tool:
///   run      --scenario NAME | --config FILE  [--gamma --horizon --steps --seed --offset --out --format]
///   validate --scenario NAME | --config FILE  [--depth N]
///   list
/// Returns 0 on success, 1 on usage or config errors, 2 on runtime errors.
/// MORTAL_AGENTS_SEED supplies a default seed; --seed wins over it.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Semimeasure environments, death, and Bayesian mixture agents", "mortal_agents"};
    app.require_subcommand(1);

    std::string scenario, config_path, out_path, format;
    std::optional<double> gamma, offset;
    std::optional<std::size_t> horizon, steps, depth;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "simulate a scenario and write its trajectory log");
    run->add_option("--scenario", scenario, "built-in scenario name");
    run->add_option("--config", config_path, "scenario config file (JSON)");
    run->add_option("--gamma", gamma, "geometric discount in (0,1)");
    run->add_option("--horizon", horizon, "planning horizon");
    run->add_option("--steps", steps, "simulation steps");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--offset", offset, "reward offset added to every percept");
    run->add_option("--out", out_path, "output path (default: stdout)");
    run->add_option("--format", format, "csv | json-lines");

    auto* check = app.add_subcommand("validate", "check that a config's environments are semimeasures");
    check->add_option("--scenario", scenario, "built-in scenario name");
    check->add_option("--config", config_path, "scenario config file (JSON)");
    check->add_option("--depth", depth, "history depth to enumerate");

    app.add_subcommand("list", "print built-in scenarios");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (app.got_subcommand("list")) {
            detail::print_scenarios(out);
            return kExitOk;
        }

        ScenarioConfig cfg = detail::resolve_config(scenario, config_path, err);

        if (app.got_subcommand("validate")) {
            bool clean = true;
            for (const auto& [what, report] : validate_config(cfg, depth.value_or(cfg.validate_depth))) {
                if (report.empty()) {
                    out << what << ": ok\n";
                    continue;
                }
                clean = false;
                for (const auto& v : report) err << what << ": " << describe_violation(v) << '\n';
            }
            return clean ? kExitOk : kExitConfig;
        }

        if (const char* env_seed = std::getenv("MORTAL_AGENTS_SEED"); env_seed && *env_seed) {
            try {
                cfg.seed = std::stoull(env_seed);
            } catch (const std::exception&) {
                throw ConfigError(std::string("MORTAL_AGENTS_SEED is not an integer: ") + env_seed);
            }
        }
        if (gamma) cfg.gamma = *gamma;
        if (horizon) cfg.horizon = *horizon;
        if (steps) cfg.steps = *steps;
        if (seed) cfg.seed = *seed;
        if (offset) cfg.offset = *offset;
        if (!out_path.empty()) cfg.output = out_path;
        if (!format.empty()) cfg.format = format;

        const TrajectoryLog log = run_scenario(cfg);
        if (cfg.output.empty() || cfg.output == "-") write_log(log, out, cfg.format);
        else write_log(log, cfg.output, cfg.format);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

inline int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args);
}

}  // namespace mortal

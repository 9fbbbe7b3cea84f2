#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mortal/core.hpp"
#include "mortal/envs.hpp"
#include "mortal/mixture.hpp"
#include "mortal/planner.hpp"
#include "mortal/semimeasure.hpp"

namespace mortal {

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

using json = nlohmann::json;

enum class AgentKind { aimu, aixi, fixed };

struct MixtureSpec {
    std::vector<json> members;
    std::vector<std::string> names;
    std::string prior_mode = "uniform";  // uniform | description-length
    std::vector<double> priors;          // explicit override when non-empty
    std::size_t ratio_numerator = 0;
    std::size_t ratio_denominator = 1;
};

struct ScenarioConfig {
    std::string name = "custom";
    AgentKind agent = AgentKind::aimu;
    json environment;
    std::optional<MixtureSpec> mixture;
    std::vector<ActionId> fixed_actions;
    double gamma = 0.9;
    std::size_t horizon = 10;
    std::size_t steps = 50;
    double offset = 0.0;
    std::uint64_t seed = 1;
    bool condition_on_survival = false;
    double tolerance = kTolerance;
    std::size_t validate_depth = 3;
    std::string output;
    std::string format = "csv";
};

// ---------------------------------------------------------------------------
// environment specs

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
    return get_or<T>(j, key, T{});
}

}  // namespace detail

/// Builds an environment from its config object:
///   {"kind": "cliff" | "bernoulli" | "random" | "table", ...parameters,
///    "normalize": bool, "death_state": bool, "death_reward": number}
inline EnvPtr build_environment(const json& spec) {
    if (!spec.is_object()) throw ConfigError("environment spec must be an object");
    const auto kind = detail::require<std::string>(spec, "kind");
    EnvPtr env;
    try {
        if (kind == "cliff") {
            env = make_cliff(detail::get_or<double>(spec, "alive_reward", 0.5));
        } else if (kind == "bernoulli") {
            env = make_bernoulli_risk(detail::require<double>(spec, "survival_prob"),
                                      detail::get_or<double>(spec, "reward", 1.0));
        } else if (kind == "random") {
            env = make_random_semimeasure(detail::require<std::uint64_t>(spec, "seed"),
                                          detail::get_or<std::size_t>(spec, "actions", 2),
                                          detail::get_or<std::size_t>(spec, "percepts", 2),
                                          detail::get_or<std::size_t>(spec, "depth", 4));
        } else if (kind == "table") {
            auto layers = detail::require<std::vector<envs::TableEnvironment::Layer>>(spec, "layers");
            env = std::make_shared<envs::TableEnvironment>(
                PerceptAlphabet(detail::require<std::vector<double>>(spec, "rewards")),
                detail::require<std::size_t>(spec, "actions"), std::move(layers),
                detail::get_or<std::string>(spec, "name", "table"));
        } else {
            throw ConfigError("unknown environment kind '" + kind + "' (expected cliff | bernoulli | random | table)");
        }
        if (detail::get_or<bool>(spec, "normalize", false)) env = normalize(env);
        if (detail::get_or<bool>(spec, "death_state", false))
            env = augment_death_state(env, detail::get_or<double>(spec, "death_reward", 0.0));
    } catch (const ParameterError& e) {
        throw ConfigError("environment '" + kind + "': " + e.what());
    }
    return env;
}

/// Prior weights. Description-length mode uses w ~ 2^-len(spec text) as a
/// computable stand-in for a complexity prior.
inline std::vector<double> mixture_priors(const MixtureSpec& spec) {
    const std::size_t n = spec.members.size();
    if (!spec.priors.empty()) {
        if (spec.priors.size() != n) throw ConfigError("mixture.priors must list one weight per member");
        return spec.priors;
    }
    if (spec.prior_mode == "uniform") return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (spec.prior_mode == "description-length") {
        std::vector<double> log_w;
        for (const auto& m : spec.members) log_w.push_back(-static_cast<double>(m.dump().size()) * std::log(2.0));
        detail::normalize_log(log_w);
        for (double& x : log_w) x = std::exp(x);
        return log_w;
    }
    throw ConfigError("unknown prior mode '" + spec.prior_mode + "' (expected uniform | description-length)");
}

// ---------------------------------------------------------------------------
// config parsing

inline ScenarioConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be an object");
    ScenarioConfig cfg;
    cfg.name = detail::get_or<std::string>(j, "scenario", "custom");
    const auto agent = detail::get_or<std::string>(j, "agent", "aimu");
    if (agent == "aimu") cfg.agent = AgentKind::aimu;
    else if (agent == "aixi") cfg.agent = AgentKind::aixi;
    else if (agent == "fixed") cfg.agent = AgentKind::fixed;
    else throw ConfigError("unknown agent '" + agent + "' (expected aimu | aixi | fixed)");

    if (!j.contains("environment")) throw ConfigError("missing required key 'environment'");
    cfg.environment = j.at("environment");

    if (j.contains("mixture")) {
        const auto& mj = j.at("mixture");
        MixtureSpec ms;
        ms.members = detail::require<std::vector<json>>(mj, "members");
        if (ms.members.empty()) throw ConfigError("mixture.members must be non-empty");
        for (std::size_t i = 0; i < ms.members.size(); ++i)
            ms.names.push_back(detail::get_or<std::string>(ms.members[i], "name", "m" + std::to_string(i)));
        ms.prior_mode = detail::get_or<std::string>(mj, "prior", "uniform");
        ms.priors = detail::get_or<std::vector<double>>(mj, "priors", {});
        const auto ratio = detail::get_or<std::vector<std::size_t>>(mj, "ratio", {0, ms.members.size() > 1 ? 1u : 0u});
        if (ratio.size() != 2 || ratio[0] >= ms.members.size() || ratio[1] >= ms.members.size())
            throw ConfigError("mixture.ratio must name two member indices");
        ms.ratio_numerator = ratio[0];
        ms.ratio_denominator = ratio[1];
        cfg.mixture = std::move(ms);
    }
    if (cfg.agent == AgentKind::aixi && !cfg.mixture) throw ConfigError("agent 'aixi' requires a mixture");

    cfg.fixed_actions = detail::get_or<std::vector<ActionId>>(j, "actions", {});
    if (cfg.agent == AgentKind::fixed && cfg.fixed_actions.empty())
        throw ConfigError("agent 'fixed' requires a non-empty 'actions' list");

    cfg.gamma = detail::get_or<double>(j, "gamma", cfg.gamma);
    cfg.horizon = detail::get_or<std::size_t>(j, "horizon", cfg.horizon);
    cfg.steps = detail::get_or<std::size_t>(j, "steps", cfg.steps);
    cfg.offset = detail::get_or<double>(j, "offset", cfg.offset);
    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.condition_on_survival = detail::get_or<bool>(j, "condition_on_survival", false);
    cfg.tolerance = detail::get_or<double>(j, "tolerance", cfg.tolerance);
    cfg.validate_depth = detail::get_or<std::size_t>(j, "validate_depth", cfg.validate_depth);
    cfg.output = detail::get_or<std::string>(j, "output", "");
    cfg.format = detail::get_or<std::string>(j, "format", cfg.format);
    if (const auto tb = detail::get_or<std::string>(j, "tie_break", "lowest-index"); tb != "lowest-index")
        throw ConfigError("unsupported tie_break '" + tb + "' (only lowest-index)");
    return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// built-in scenarios

struct BuiltinScenario {
    const char* name;
    const char* summary;
    const char* config;
};

inline const std::vector<BuiltinScenario>& builtin_scenarios() {
    static const std::vector<BuiltinScenario> table{
        {"self-preserve", "AImu on the cliff with rewards in [0,1]: never jumps",
         R"({"scenario": "self-preserve", "agent": "aimu",
             "environment": {"kind": "cliff", "alive_reward": 0.5},
             "gamma": 0.9, "horizon": 10, "steps": 50, "seed": 1})"},
        {"suicide", "AImu on the cliff with rewards shifted by -1: jumps at t=1",
         R"({"scenario": "suicide", "agent": "aimu",
             "environment": {"kind": "cliff", "alive_reward": 0.5},
             "offset": -1.0, "gamma": 0.9, "horizon": 10, "steps": 50, "seed": 1})"},
        {"death-state", "AImu on the cliff's explicit death-state twin, shifted by -1: death reward shifts too, so it stays",
         R"({"scenario": "death-state", "agent": "aimu",
             "environment": {"kind": "cliff", "alive_reward": 0.5, "death_state": true},
             "offset": -1.0, "gamma": 0.9, "horizon": 10, "steps": 50, "seed": 1})"},
        {"posterior", "AIxi over {risky p=0.9, its normalization}, survival-conditioned: ratio decays as 0.9^t",
         R"({"scenario": "posterior", "agent": "aixi",
             "environment": {"kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0},
             "mixture": {"members": [
                 {"name": "risky", "kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0},
                 {"name": "safe", "kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0, "normalize": true}],
               "prior": "uniform", "ratio": [0, 1]},
             "condition_on_survival": true,
             "gamma": 0.9, "horizon": 5, "steps": 100, "seed": 1})"},
        {"safe", "AIxi over {risky p=0.9, safe} living in the safe environment: death estimate vanishes",
         R"({"scenario": "safe", "agent": "aixi",
             "environment": {"kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0, "normalize": true},
             "mixture": {"members": [
                 {"name": "risky", "kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0},
                 {"name": "safe", "kind": "bernoulli", "survival_prob": 0.9, "reward": 1.0, "normalize": true}],
               "prior": "uniform", "ratio": [0, 1]},
             "gamma": 0.9, "horizon": 5, "steps": 100, "seed": 1})"},
        {"immortality", "AIxi over {risky cliff, normalized cliff}: lives forever, never learns it is immortal",
         R"({"scenario": "immortality", "agent": "aixi",
             "environment": {"kind": "cliff", "alive_reward": 0.5},
             "mixture": {"members": [
                 {"name": "risky", "kind": "cliff", "alive_reward": 0.5},
                 {"name": "safe", "kind": "cliff", "alive_reward": 0.5, "normalize": true}],
               "prior": "uniform", "ratio": [0, 1]},
             "gamma": 0.9, "horizon": 10, "steps": 100, "seed": 1})"},
    };
    return table;
}

inline std::optional<ScenarioConfig> builtin_config(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (name == s.name) return parse_config_text(s.config);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// simulation

struct LogRow {
    std::size_t t = 0;
    ActionId action = 0;
    std::optional<Percept> percept;  // empty on death
    std::vector<double> posteriors;
    double ratio = 0.0;
    double lxi_chosen = 0.0;
    std::vector<double> lxi;  // per action
    std::vector<double> values;  // per action

    bool died() const { return !percept.has_value(); }
};

struct TrajectoryLog {
    std::vector<std::string> members;
    std::size_t action_count = 0;
    std::vector<LogRow> rows;
};

/// Environments a config refers to, after the reward offset.
struct ScenarioWorld {
    EnvPtr truth;
    Mixture model;
    std::size_t ratio_numerator = 0;
    std::size_t ratio_denominator = 0;
};

inline ScenarioWorld build_world(const ScenarioConfig& cfg) {
    EnvPtr truth = shift_rewards(build_environment(cfg.environment), cfg.offset);
    if (!cfg.mixture) return {truth, Mixture({truth}, {1.0}, {"mu"}), 0, 0};

    std::vector<EnvPtr> members;
    for (const auto& spec : cfg.mixture->members) members.push_back(shift_rewards(build_environment(spec), cfg.offset));
    try {
        Mixture model(members, mixture_priors(*cfg.mixture), cfg.mixture->names);
        if (model.action_count() != truth->action_count() || model.percept_count() != truth->percept_count())
            throw ConfigError("mixture members and true environment use different alphabets");
        return {truth, std::move(model), cfg.mixture->ratio_numerator, cfg.mixture->ratio_denominator};
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("mixture: ") + e.what());
    }
}

/// Validation report per environment of the config (true environment first).
inline std::vector<std::pair<std::string, ValidationReport>> validate_config(const ScenarioConfig& cfg,
                                                                             std::size_t depth) {
    const auto world = build_world(cfg);
    std::vector<std::pair<std::string, ValidationReport>> out;
    out.emplace_back("environment", validate(*world.truth, depth, cfg.tolerance));
    if (cfg.mixture)
        for (std::size_t i = 0; i < world.model.size(); ++i)
            out.emplace_back("mixture member '" + world.model.names()[i] + "'",
                             validate(*world.model.members()[i], depth, cfg.tolerance));
    return out;
}

inline std::string describe_violation(const Violation& v) {
    std::ostringstream s;
    s << "history [" << v.history.to_string() << "]: " << v.reason << " (mass " << v.mass << ")";
    return s.str();
}

inline void check_config(const ScenarioConfig& cfg) {
    if (cfg.steps < 1) throw ConfigError("steps must be at least 1");
    if (cfg.format != "csv" && cfg.format != "json-lines" && cfg.format != "jsonl")
        throw ConfigError("unknown format '" + cfg.format + "' (expected csv | json-lines)");
    try {
        (void)DiscountSchedule(cfg.gamma, cfg.horizon);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [what, report] : validate_config(cfg, cfg.validate_depth))
        if (!report.empty()) throw ConfigError(what + " is not a semimeasure: " + describe_violation(report.front()));
}

namespace detail {

inline double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double safe_ratio(const Mixture& m, std::size_t i, std::size_t j) {
    try {
        return m.posterior_ratio(i, j);
    } catch (const DegeneratePosterior&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

/// Runs the agent/environment loop. One uniform draw per step decides death
/// (u >= total mass) and otherwise picks the percept from the normalized
/// conditional. With `condition_on_survival` the draw is rescaled into the
/// surviving mass. Row t records the action chosen at t, its percept, the
/// values and death estimates that informed the choice, and the posterior
/// after conditioning on the percept.
inline TrajectoryLog run_scenario(const ScenarioConfig& cfg) {
    check_config(cfg);
    auto world = build_world(cfg);
    const DiscountSchedule discount(cfg.gamma, cfg.horizon);
    const Environment& truth = *world.truth;
    Mixture& model = world.model;

    TrajectoryLog log;
    log.members = model.names();
    log.action_count = truth.action_count();

    std::mt19937_64 rng(cfg.seed);
    History h;
    for (std::size_t t = 1; t <= cfg.steps; ++t) {
        auto [planned, values] = cfg.agent == AgentKind::aimu ? optimal_action(truth, h, discount)
                                                               : aixi_like_action(model, h, discount);
        ActionId action = planned;
        if (cfg.agent == AgentKind::fixed) action = cfg.fixed_actions[(t - 1) % cfg.fixed_actions.size()];
        if (action >= truth.action_count()) throw ConfigError("fixed action outside the action alphabet");

        LogRow row;
        row.t = t;
        row.action = action;
        row.values = std::move(values.per_action);
        for (ActionId a = 0; a < truth.action_count(); ++a)
            row.lxi.push_back(mixture_measure_loss(model, h.with_action(a)).value);
        row.lxi_chosen = row.lxi[action];

        const auto cond = truth.conditional(h.with_action(action));
        const double total = detail::mass(cond);
        double u = detail::draw_unit(rng);
        bool dies = false;
        if (cfg.condition_on_survival) {
            dies = !(total > 0.0);
            u *= total;
        } else {
            dies = u >= total;
        }

        if (!dies) {
            std::size_t chosen = cond.size();
            double cumulative = 0.0;
            for (std::size_t e = 0; e < cond.size(); ++e) {
                if (!(cond[e] > 0.0)) continue;
                cumulative += cond[e];
                chosen = e;
                if (u < cumulative) break;
            }
            const Percept percept = truth.alphabet().percept(chosen);
            model = model.update(action, percept);
            h = h.append(action, percept);
            row.percept = percept;
        }
        row.posteriors = model.posteriors();
        row.ratio = detail::safe_ratio(model, world.ratio_numerator, world.ratio_denominator);
        log.rows.push_back(std::move(row));
        if (dies) break;
    }
    return log;
}

// ---------------------------------------------------------------------------
// log output

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::vector<std::string> log_header(const TrajectoryLog& log) {
    std::vector<std::string> cols{"t", "action", "observation", "reward", "death"};
    for (const auto& m : log.members) cols.push_back("w_" + m);
    cols.push_back("ratio");
    cols.push_back("Lxi_chosen");
    for (std::size_t a = 0; a < log.action_count; ++a) cols.push_back("Lxi_" + std::to_string(a));
    for (std::size_t a = 0; a < log.action_count; ++a) cols.push_back("V_" + std::to_string(a));
    return cols;
}

inline std::vector<std::string> log_cells(const LogRow& row) {
    std::vector<std::string> cells{std::to_string(row.t), std::to_string(row.action),
                                   row.died() ? "DEATH" : std::to_string(row.percept->observation),
                                   format_number(row.died() ? 0.0 : row.percept->reward), row.died() ? "1" : "0"};
    for (double w : row.posteriors) cells.push_back(format_number(w));
    cells.push_back(format_number(row.ratio));
    cells.push_back(format_number(row.lxi_chosen));
    for (double l : row.lxi) cells.push_back(format_number(l));
    for (double v : row.values) cells.push_back(format_number(v));
    return cells;
}

inline void write_log(const TrajectoryLog& log, std::ostream& out, const std::string& format) {
    const auto header = log_header(log);
    if (format == "csv") {
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << '\n';
        for (const auto& row : log.rows) {
            const auto cells = log_cells(row);
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        }
    } else if (format == "json-lines" || format == "jsonl") {
        for (const auto& row : log.rows) {
            const auto cells = log_cells(row);
            out << '{';
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out << (i ? "," : "") << '"' << header[i] << "\":";
                const std::string& c = cells[i];
                if (c == "DEATH") out << "\"DEATH\"";
                else if (c == "nan" || c == "inf" || c == "-inf") out << "null";
                else out << c;
            }
            out << "}\n";
        }
    } else {
        throw ConfigError("unknown format '" + format + "' (expected csv | json-lines)");
    }
}

inline void write_log(const TrajectoryLog& log, const std::string& path, const std::string& format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_log(log, out, format);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

/// Parsed CSV log, as consumed by downstream plotting.
struct CsvLog {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("missing column '" + name + "'");
    }

    std::vector<double> column(const std::string& name) const {
        const std::size_t i = column_index(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(std::stod(r.at(i)));
        return out;
    }
};

inline CsvLog read_csv_log(std::istream& in) {
    CsvLog log;
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream s(line);
        std::string cell;
        while (std::getline(s, cell, ',')) cells.push_back(cell);
        return cells;
    };
    std::string line;
    if (std::getline(in, line)) log.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) log.rows.push_back(split(line));
    return log;
}

inline CsvLog read_csv_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv_log(in);
}

}  // namespace mortal

#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mortal/core.hpp"

namespace mortal {

/// A chronological semimeasure over percepts. `conditional(h)` returns
/// nu(e | h) for every percept symbol given a history ending in a pending
/// action. Implementations must be pure: same history, same vector.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::size_t action_count() const = 0;
    virtual const PerceptAlphabet& alphabet() const = 0;
    virtual std::vector<double> conditional(const History& h) const = 0;
    virtual std::string describe() const = 0;

    std::size_t percept_count() const { return alphabet().size(); }
};

using EnvPtr = std::shared_ptr<const Environment>;

namespace detail {

inline void require_pending(const History& h, const char* op) {
    if (!h.has_pending()) throw StructuralMisuse(std::string(op) + ": history must end in a pending action");
}

inline double mass(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace detail

struct MeasureLoss {
    double value = 0.0;
};

inline MeasureLoss measure_loss(const Environment& env, const History& h, double tol = kTolerance) {
    detail::require_pending(h, "measure_loss");
    const auto cond = env.conditional(h);
    for (double p : cond)
        if (p < 0.0) throw SemimeasureViolation("negative conditional at " + h.to_string());
    const double total = detail::mass(cond);
    if (total > 1.0 + tol)
        throw SemimeasureViolation("conditional mass " + std::to_string(total) + " exceeds 1 at " + h.to_string());
    return {std::clamp(1.0 - total, 0.0, 1.0)};
}

struct Violation {
    History history;
    std::vector<double> conditional;
    double mass = 0.0;
    std::string reason;
};

using ValidationReport = std::vector<Violation>;

/// Checks every history with t <= depth (all actions, all percepts) for
/// negative entries or conditional mass above 1 + tol.
inline ValidationReport validate(const Environment& env, std::size_t depth, double tol = kTolerance) {
    ValidationReport report;
    const std::size_t actions = env.action_count();
    const std::size_t percepts = env.percept_count();

    std::vector<History> frontier{History{}};
    for (std::size_t t = 1; t <= depth; ++t) {
        std::vector<History> next;
        for (const auto& h : frontier) {
            for (ActionId a = 0; a < actions; ++a) {
                const History ha = h.with_action(a);
                auto cond = env.conditional(ha);
                const double total = detail::mass(cond);
                std::string reason;
                if (cond.size() != percepts)
                    reason = "conditional has " + std::to_string(cond.size()) + " entries, expected " +
                             std::to_string(percepts);
                else if (std::any_of(cond.begin(), cond.end(), [](double p) { return !(p >= 0.0); }))
                    reason = "negative or non-finite entry";
                else if (total > 1.0 + tol)
                    reason = "mass exceeds 1";
                if (!reason.empty()) report.push_back({ha, std::move(cond), total, std::move(reason)});
                if (t < depth)
                    for (std::size_t e = 0; e < percepts; ++e) next.push_back(h.append(a, env.alphabet().percept(e)));
            }
        }
        frontier = std::move(next);
    }
    return report;
}

/// Probability nu(e_{1:t} | a_{1:t}) of the percepts in `h`, as a product of conditionals.
inline double joint_probability(const Environment& env, const History& h) {
    double p = 1.0;
    History prefix;
    for (const auto& s : h.steps()) {
        const auto cond = env.conditional(prefix.with_action(s.action));
        p *= cond.at(s.percept.observation);
        if (p == 0.0) return 0.0;
        prefix = prefix.append(s.action, s.percept);
    }
    return p;
}

namespace detail {

class NormalizedEnvironment final : public Environment {
public:
    explicit NormalizedEnvironment(EnvPtr inner) : inner_(std::move(inner)) {}

    std::size_t action_count() const override { return inner_->action_count(); }
    const PerceptAlphabet& alphabet() const override { return inner_->alphabet(); }
    std::string describe() const override { return "normalize(" + inner_->describe() + ")"; }

    std::vector<double> conditional(const History& h) const override {
        auto cond = inner_->conditional(h);
        const double total = mass(cond);
        if (total > 0.0) {
            for (double& p : cond) p /= total;
        } else {
            // Zero-mass histories are unreachable under the normalized measure; uniform keeps it total.
            std::fill(cond.begin(), cond.end(), 1.0 / static_cast<double>(cond.size()));
        }
        return cond;
    }

private:
    EnvPtr inner_;
};

class DeathStateEnvironment final : public Environment {
public:
    DeathStateEnvironment(EnvPtr inner, double death_reward)
        : inner_(std::move(inner)), alphabet_(inner_->alphabet().with_death_percept(death_reward)) {}

    std::size_t action_count() const override { return inner_->action_count(); }
    const PerceptAlphabet& alphabet() const override { return alphabet_; }
    std::string describe() const override { return "death_state(" + inner_->describe() + ")"; }

    std::vector<double> conditional(const History& h) const override {
        const std::size_t death = alphabet_.death_index();
        std::vector<double> cond(alphabet_.size(), 0.0);
        if (h.contains_observation(death)) {
            cond[death] = 1.0;
            return cond;
        }
        const auto base = inner_->conditional(h);
        std::copy(base.begin(), base.end(), cond.begin());
        cond[death] = std::clamp(1.0 - mass(base), 0.0, 1.0);
        return cond;
    }

private:
    EnvPtr inner_;
    PerceptAlphabet alphabet_;
};

}  // namespace detail

/// Solomonoff normalization: each conditional divided by its mass.
inline EnvPtr normalize(EnvPtr env) { return std::make_shared<detail::NormalizedEnvironment>(std::move(env)); }

/// Proper measure that routes the measure loss of `env` to an absorbing
/// death percept with reward `death_reward`.
inline EnvPtr augment_death_state(EnvPtr env, double death_reward = 0.0) {
    return std::make_shared<detail::DeathStateEnvironment>(std::move(env), death_reward);
}

}  // namespace mortal

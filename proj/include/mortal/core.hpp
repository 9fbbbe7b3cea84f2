#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mortal {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructuralMisuse : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class SemimeasureViolation : public Error {
public:
    using Error::Error;
};

// Slack for every semimeasure-sum comparison.
inline constexpr double kTolerance = 1e-9;

using ActionId = std::size_t;

struct Percept {
    std::size_t observation = 0;
    double reward = 0.0;

    friend bool operator==(const Percept&, const Percept&) = default;
};

/// Finite percept alphabet. Symbol i is the percept (i, rewards[i]); an
/// optional death percept occupies the index one past the base symbols.
class PerceptAlphabet {
public:
    PerceptAlphabet() = default;

    explicit PerceptAlphabet(std::vector<double> rewards, std::optional<double> death_reward = std::nullopt)
        : rewards_(std::move(rewards)), death_reward_(death_reward) {
        if (rewards_.empty()) throw ParameterError("percept alphabet must be non-empty");
        for (double r : rewards_)
            if (!std::isfinite(r)) throw ParameterError("percept rewards must be finite");
        if (death_reward_ && !std::isfinite(*death_reward_))
            throw ParameterError("death reward must be finite");
    }

    std::size_t base_size() const { return rewards_.size(); }
    std::size_t size() const { return rewards_.size() + (death_reward_ ? 1 : 0); }

    bool has_death_percept() const { return death_reward_.has_value(); }
    std::size_t death_index() const {
        if (!death_reward_) throw StructuralMisuse("alphabet has no death percept");
        return rewards_.size();
    }

    double reward(std::size_t symbol) const {
        if (symbol < rewards_.size()) return rewards_[symbol];
        if (death_reward_ && symbol == rewards_.size()) return *death_reward_;
        throw StructuralMisuse("percept symbol " + std::to_string(symbol) + " outside alphabet");
    }

    Percept percept(std::size_t symbol) const { return {symbol, reward(symbol)}; }

    const std::vector<double>& base_rewards() const { return rewards_; }
    std::optional<double> death_reward() const { return death_reward_; }

    PerceptAlphabet with_death_percept(double death_reward) const {
        if (death_reward_) throw StructuralMisuse("alphabet already has a death percept");
        return PerceptAlphabet(rewards_, death_reward);
    }

    PerceptAlphabet shifted(double offset) const {
        std::vector<double> r = rewards_;
        for (double& x : r) x += offset;
        std::optional<double> d = death_reward_;
        if (d) *d += offset;
        return PerceptAlphabet(std::move(r), d);
    }

    friend bool operator==(const PerceptAlphabet&, const PerceptAlphabet&) = default;

private:
    std::vector<double> rewards_;
    std::optional<double> death_reward_;
};

struct Step {
    ActionId action = 0;
    Percept percept;

    friend bool operator==(const Step&, const Step&) = default;
};

/// Alternating action/percept sequence, optionally ending in an action the
/// environment has not answered yet. Extending a history returns a new value.
class History {
public:
    History() = default;

    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty() && !pending_; }
    const std::vector<Step>& steps() const { return steps_; }
    const Step& operator[](std::size_t i) const { return steps_[i]; }

    std::optional<ActionId> pending_action() const { return pending_; }
    bool has_pending() const { return pending_.has_value(); }

    /// Time index of the next percept (1-based): a history of t-1 cycles sits at t.
    std::size_t time() const { return steps_.size() + 1; }

    History append(ActionId a, Percept e) const {
        if (pending_) throw StructuralMisuse("cannot append a full cycle after a pending action");
        History h = *this;
        h.steps_.push_back({a, e});
        return h;
    }

    History with_action(ActionId a) const {
        if (pending_) throw StructuralMisuse("history already ends in a pending action");
        History h = *this;
        h.pending_ = a;
        return h;
    }

    // Completes the pending action with a percept.
    History answer(Percept e) const {
        if (!pending_) throw StructuralMisuse("no pending action to answer");
        History h = *this;
        h.steps_.push_back({*pending_, e});
        h.pending_.reset();
        return h;
    }

    History without_pending() const {
        History h = *this;
        h.pending_.reset();
        return h;
    }

    History prefix(std::size_t n) const {
        History h;
        h.steps_.assign(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(std::min(n, steps_.size())));
        return h;
    }

    bool contains_observation(std::size_t observation) const {
        for (const auto& s : steps_)
            if (s.percept.observation == observation) return true;
        return false;
    }

    std::string to_string() const {
        std::string out;
        for (const auto& s : steps_) {
            if (!out.empty()) out += ' ';
            out += 'a' + std::to_string(s.action) + " e" + std::to_string(s.percept.observation);
        }
        if (pending_) {
            if (!out.empty()) out += ' ';
            out += "a" + std::to_string(*pending_) + " ?";
        }
        return out.empty() ? std::string("(empty)") : out;
    }

    friend bool operator==(const History&, const History&) = default;

private:
    std::vector<Step> steps_;
    std::optional<ActionId> pending_;
};

inline History history_append(const History& h, ActionId a, Percept e) { return h.append(a, e); }

/// Geometric discount gamma^t truncated to a planning window of `horizon` steps.
struct DiscountSchedule {
    double gamma = 0.9;
    std::size_t horizon = 1;

    DiscountSchedule() = default;
    DiscountSchedule(double g, std::size_t m) : gamma(g), horizon(m) {
        if (!(g > 0.0 && g < 1.0)) throw ParameterError("gamma must lie in (0,1)");
        if (m < 1) throw ParameterError("horizon must be at least 1");
    }
};

inline double discount_weight(const DiscountSchedule& d, std::size_t t) {
    return std::pow(d.gamma, static_cast<double>(t));
}

// Sum of gamma^k over the window k = t .. t+m-1.
inline double discount_normalizer(const DiscountSchedule& d, std::size_t t) {
    double total = 0.0;
    for (std::size_t k = t; k < t + d.horizon; ++k) total += discount_weight(d, k);
    return total;
}

}  // namespace mortal

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mortal/core.hpp"
#include "mortal/semimeasure.hpp"

namespace mortal {

namespace envs {

// Action indices of the cliff environment.
inline constexpr ActionId kStay = 0;
inline constexpr ActionId kJump = 1;

/// Explicit conditionals per (history length, action); histories longer than
/// the table reuse its deepest layer.
class TableEnvironment final : public Environment {
public:
    using Layer = std::vector<std::vector<double>>;  // [action][percept]

    TableEnvironment(PerceptAlphabet alphabet, std::size_t actions, std::vector<Layer> layers, std::string name)
        : alphabet_(std::move(alphabet)), actions_(actions), layers_(std::move(layers)), name_(std::move(name)) {
        if (actions_ == 0) throw ParameterError("table environment needs at least one action");
        if (layers_.empty()) throw ParameterError("table environment needs at least one layer");
        for (const auto& layer : layers_) {
            if (layer.size() != actions_) throw ParameterError("table layer must list one row per action");
            for (const auto& row : layer)
                if (row.size() != alphabet_.size()) throw ParameterError("table row must list one entry per percept");
        }
    }

    std::size_t action_count() const override { return actions_; }
    const PerceptAlphabet& alphabet() const override { return alphabet_; }
    std::string describe() const override { return name_; }

    std::vector<double> conditional(const History& h) const override {
        detail::require_pending(h, "table conditional");
        const std::size_t depth = std::min(h.size(), layers_.size() - 1);
        return layers_[depth].at(*h.pending_action());
    }

private:
    PerceptAlphabet alphabet_;
    std::size_t actions_;
    std::vector<Layer> layers_;
    std::string name_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Seeded semimeasure whose conditionals are a pure hash of the seed and the
/// first `depth - 1` cycles of the history; deeper histories repeat the
/// deepest conditionals of their prefix.
class RandomSemimeasureEnvironment final : public Environment {
public:
    RandomSemimeasureEnvironment(std::uint64_t seed, std::size_t actions, std::size_t percepts, std::size_t depth)
        : seed_(seed), actions_(actions), depth_(depth) {
        if (actions < 1 || actions > 4 || percepts < 1 || percepts > 4)
            throw ParameterError("random environment counts must lie in [1,4]");
        if (depth < 1 || depth > 6) throw ParameterError("random environment depth must lie in [1,6]");
        std::vector<double> rewards(percepts);
        std::uint64_t state = detail::splitmix64(seed ^ 0x5eedULL);
        for (auto& r : rewards) {
            state = detail::splitmix64(state);
            r = 2.0 * detail::unit_interval(state) - 1.0;
        }
        alphabet_ = PerceptAlphabet(std::move(rewards));
    }

    std::size_t action_count() const override { return actions_; }
    const PerceptAlphabet& alphabet() const override { return alphabet_; }
    std::string describe() const override {
        return "random(seed=" + std::to_string(seed_) + ",actions=" + std::to_string(actions_) +
               ",percepts=" + std::to_string(alphabet_.size()) + ",depth=" + std::to_string(depth_) + ")";
    }

    std::vector<double> conditional(const History& h) const override {
        mortal::detail::require_pending(h, "random conditional");
        const std::size_t used = std::min(h.size(), depth_ - 1);
        std::uint64_t key = detail::splitmix64(seed_);
        for (std::size_t i = 0; i < used; ++i) {
            key = detail::splitmix64(key ^ (h[i].action + 1));
            key = detail::splitmix64(key ^ ((h[i].percept.observation + 1) << 8));
        }
        key = detail::splitmix64(key ^ ((*h.pending_action() + 1) << 16));

        const double total = detail::unit_interval(key);
        std::vector<double> split(alphabet_.size());
        double weight_sum = 0.0;
        for (auto& w : split) {
            key = detail::splitmix64(key);
            w = detail::unit_interval(key) + 1e-3;
            weight_sum += w;
        }
        for (auto& w : split) w = total * (w / weight_sum);
        return split;
    }

private:
    std::uint64_t seed_;
    std::size_t actions_;
    std::size_t depth_;
    PerceptAlphabet alphabet_;
};

/// Same conditionals as `inner`, every percept reward incremented by `offset`.
class ShiftedEnvironment final : public Environment {
public:
    ShiftedEnvironment(EnvPtr inner, double offset)
        : inner_(std::move(inner)), alphabet_(inner_->alphabet().shifted(offset)), offset_(offset) {}

    std::size_t action_count() const override { return inner_->action_count(); }
    const PerceptAlphabet& alphabet() const override { return alphabet_; }
    std::string describe() const override {
        return "shift(" + inner_->describe() + "," + std::to_string(offset_) + ")";
    }
    std::vector<double> conditional(const History& h) const override { return inner_->conditional(h); }

private:
    EnvPtr inner_;
    PerceptAlphabet alphabet_;
    double offset_;
};

}  // namespace envs

/// Two actions: stay (kStay) survives with certainty and emits the single
/// percept with `alive_reward`; jump (kJump) loses all mass.
inline EnvPtr make_cliff(double alive_reward) {
    if (!std::isfinite(alive_reward)) throw ParameterError("cliff alive reward must be finite");
    std::vector<envs::TableEnvironment::Layer> layers{{{1.0}, {0.0}}};
    return std::make_shared<envs::TableEnvironment>(PerceptAlphabet({alive_reward}), 2, std::move(layers),
                                                    "cliff(" + std::to_string(alive_reward) + ")");
}

/// One action, one percept, constant survival probability `p`.
inline EnvPtr make_bernoulli_risk(double p, double reward) {
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("survival probability must lie in (0,1]");
    std::vector<envs::TableEnvironment::Layer> layers{{{p}}};
    return std::make_shared<envs::TableEnvironment>(PerceptAlphabet({reward}), 1, std::move(layers),
                                                    "bernoulli(" + std::to_string(p) + "," + std::to_string(reward) +
                                                        ")");
}

inline EnvPtr make_random_semimeasure(std::uint64_t seed, std::size_t action_count, std::size_t percept_count,
                                      std::size_t depth) {
    return std::make_shared<envs::RandomSemimeasureEnvironment>(seed, action_count, percept_count, depth);
}

inline EnvPtr shift_rewards(EnvPtr env, double offset) {
    if (!std::isfinite(offset)) throw ParameterError("reward offset must be finite");
    return std::make_shared<envs::ShiftedEnvironment>(std::move(env), offset);
}

}  // namespace mortal

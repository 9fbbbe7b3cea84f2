#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "mortal/core.hpp"
#include "mortal/envs.hpp"
#include "mortal/mixture.hpp"
#include "mortal/semimeasure.hpp"

namespace mortal {

using Policy = std::function<ActionId(const History&)>;

struct ValueResult {
    double value = 0.0;
    std::vector<double> per_action;
};

namespace detail {

// Truncated expectimax. Discounts are taken relative to the root time; the
// normalized value is unchanged by that common factor and long runs cannot
// underflow the window. Intermediate results are the un-normalized sums
// Gamma_t * V_t, so a full-loss action contributes exactly 0.
class Expectimax {
public:
    Expectimax(const Environment& env, const DiscountSchedule& d, const Policy* policy)
        : env_(env), policy_(policy), weight_(d.horizon), tail_(d.horizon + 1, 0.0) {
        for (std::size_t k = 0; k < d.horizon; ++k) weight_[k] = std::pow(d.gamma, static_cast<double>(k));
        for (std::size_t k = d.horizon; k-- > 0;) tail_[k] = tail_[k + 1] + weight_[k];
    }

    double normalizer() const { return tail_[0]; }

    double action_sum(const History& pending, std::size_t k) const {
        const auto cond = env_.conditional(pending);
        double total = 0.0;
        for (std::size_t e = 0; e < cond.size(); ++e) {
            if (!(cond[e] > 0.0)) continue;
            const Percept percept = env_.alphabet().percept(e);
            double inner = weight_[k] * percept.reward;
            if (k + 1 < weight_.size()) inner += history_sum(pending.answer(percept), k + 1);
            total += cond[e] * inner;
        }
        return total;
    }

    double history_sum(const History& h, std::size_t k) const {
        if (policy_) return action_sum(h.with_action((*policy_)(h)), k);
        double best = 0.0;
        for (ActionId a = 0; a < env_.action_count(); ++a) {
            const double v = action_sum(h.with_action(a), k);
            if (a == 0 || v > best) best = v;
        }
        return best;
    }

private:
    const Environment& env_;
    const Policy* policy_;
    std::vector<double> weight_;
    std::vector<double> tail_;
};

}  // namespace detail

/// Normalized discounted value of `pi` from `h`, truncated at the schedule's
/// horizon. If `h` ends in a pending action the value of that action is returned.
inline double value_of_policy(const Environment& env, const Policy& pi, const History& h, const DiscountSchedule& d) {
    const detail::Expectimax search(env, d, &pi);
    const History pending = h.has_pending() ? h : h.with_action(pi(h));
    return search.action_sum(pending, 0) / search.normalizer();
}

/// Expectimax-optimal action at `h`; ties go to the lowest action index.
inline std::pair<ActionId, ValueResult> optimal_action(const Environment& env, const History& h,
                                                       const DiscountSchedule& d) {
    if (h.has_pending()) throw StructuralMisuse("optimal_action: history must not end in a pending action");
    const detail::Expectimax search(env, d, nullptr);
    ValueResult result;
    ActionId best = 0;
    for (ActionId a = 0; a < env.action_count(); ++a) {
        result.per_action.push_back(search.action_sum(h.with_action(a), 0) / search.normalizer());
        if (result.per_action[a] > result.per_action[best]) best = a;
    }
    result.value = result.per_action[best];
    return {best, std::move(result)};
}

/// AIxi-style choice: plan in the mixture, whose posterior chains forward
/// inside the search.
inline std::pair<ActionId, ValueResult> aixi_like_action(const Mixture& m, const History& h,
                                                         const DiscountSchedule& d) {
    if (h.size() != m.history().size())
        throw StateDesync("aixi_like_action: history length differs from mixture state");
    return optimal_action(m, h, d);
}

}  // namespace mortal

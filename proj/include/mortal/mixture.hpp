#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mortal/core.hpp"
#include "mortal/semimeasure.hpp"

namespace mortal {

class StateDesync : public Error {
public:
    using Error::Error;
};

class ImpossibleObservation : public Error {
public:
    using Error::Error;
};

class DegeneratePosterior : public Error {
public:
    using Error::Error;
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(const std::vector<double>& xs) {
    const double top = *std::max_element(xs.begin(), xs.end());
    if (top == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - top);
    return top + std::log(acc);
}

inline void normalize_log(std::vector<double>& xs) {
    const double z = log_sum_exp(xs);
    for (double& x : xs) x -= z;
}

}  // namespace detail

/// Finite Bayesian mixture xi over a class of environments sharing one action
/// and percept alphabet. Values are immutable: `update` returns the successor.
/// The mixture is itself an Environment; its conditional accepts any history
/// extending the one it has been conditioned on and chains the posterior
/// forward over the extra cycles.
class Mixture final : public Environment {
public:
    Mixture(std::vector<EnvPtr> members, std::vector<double> priors, std::vector<std::string> names = {})
        : members_(std::move(members)), names_(std::move(names)) {
        if (members_.empty()) throw ParameterError("mixture needs at least one member");
        if (priors.size() != members_.size()) throw ParameterError("one prior weight per member required");
        double total = 0.0;
        for (double w : priors) {
            if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("prior weights must be positive");
            total += w;
        }
        if (total > 1.0 + kTolerance) throw ParameterError("prior weights must sum to at most 1");
        const auto& first = members_.front();
        for (const auto& m : members_) {
            if (m->action_count() != first->action_count() || m->percept_count() != first->percept_count())
                throw ParameterError("mixture members must share action and percept alphabets");
            for (std::size_t e = 0; e < first->percept_count(); ++e)
                if (std::abs(m->alphabet().reward(e) - first->alphabet().reward(e)) > kTolerance)
                    throw ParameterError("mixture members must agree on percept rewards");
        }
        if (names_.empty())
            for (std::size_t i = 0; i < members_.size(); ++i) names_.push_back("m" + std::to_string(i));
        if (names_.size() != members_.size()) throw ParameterError("one name per member required");

        for (double w : priors) log_prior_.push_back(std::log(w));
        log_joint_.assign(members_.size(), 0.0);
        log_post_ = log_prior_;
        detail::normalize_log(log_post_);
    }

    static Mixture uniform(std::vector<EnvPtr> members, std::vector<std::string> names = {}) {
        const std::vector<double> priors(members.size(), 1.0 / static_cast<double>(members.size()));
        return Mixture(std::move(members), priors, std::move(names));
    }

    std::size_t action_count() const override { return members_.front()->action_count(); }
    const PerceptAlphabet& alphabet() const override { return members_.front()->alphabet(); }
    std::string describe() const override {
        std::string out = "mixture(";
        for (std::size_t i = 0; i < members_.size(); ++i) out += (i ? "," : "") + members_[i]->describe();
        return out + ")";
    }

    std::size_t size() const { return members_.size(); }
    const std::vector<EnvPtr>& members() const { return members_; }
    const std::vector<std::string>& names() const { return names_; }
    const History& history() const { return history_; }
    const std::vector<double>& log_joint() const { return log_joint_; }

    std::vector<double> priors() const {
        std::vector<double> out;
        for (double lw : log_prior_) out.push_back(std::exp(lw));
        return out;
    }

    /// Current posterior weights w_nu(history), summing to 1.
    std::vector<double> posteriors() const {
        std::vector<double> out;
        for (double lw : log_post_) out.push_back(std::exp(lw));
        return out;
    }

    const std::vector<double>& log_posteriors() const { return log_post_; }

    /// Posterior recomputed from the prior and the accumulated joints.
    std::vector<double> batch_posteriors() const {
        std::vector<double> lw(members_.size());
        for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = log_prior_[i] + log_joint_[i];
        detail::normalize_log(lw);
        for (double& x : lw) x = std::exp(x);
        return lw;
    }

    /// xi(. | h) where h must be exactly the conditioned history plus a pending action.
    std::vector<double> predict(const History& h) const {
        detail::require_pending(h, "predict");
        if (h.size() != history_.size() || !extends_state(h))
            throw StateDesync("predict: history " + h.to_string() + " does not match mixture state " +
                              history_.to_string());
        return blend(log_post_, h);
    }

    Mixture update(ActionId a, Percept e) const {
        if (a >= action_count()) throw StructuralMisuse("action outside alphabet");
        if (e.observation >= percept_count()) throw StructuralMisuse("percept outside alphabet");
        const History ha = history_.with_action(a);
        std::vector<double> likelihood(members_.size());
        for (std::size_t i = 0; i < members_.size(); ++i)
            likelihood[i] = members_[i]->conditional(ha).at(e.observation);

        Mixture next = *this;
        if (!advance(next.log_post_, likelihood))
            throw ImpossibleObservation("percept e" + std::to_string(e.observation) + " has xi-probability 0 after " +
                                        ha.to_string());
        for (std::size_t i = 0; i < members_.size(); ++i)
            next.log_joint_[i] += likelihood[i] > 0.0 ? std::log(likelihood[i]) : detail::kNegInf;
        next.history_ = history_.append(a, e);
        return next;
    }

    double posterior_ratio(std::size_t i, std::size_t j) const {
        if (i >= size() || j >= size()) throw StructuralMisuse("member index out of range");
        if (log_post_[j] == detail::kNegInf) throw DegeneratePosterior("denominator member has zero posterior");
        if (log_post_[i] == detail::kNegInf) return 0.0;
        return std::exp(log_post_[i] - log_post_[j]);
    }

    std::vector<double> conditional(const History& h) const override {
        detail::require_pending(h, "mixture conditional");
        if (h.size() < history_.size() || !extends_state(h))
            throw StateDesync("mixture conditional: history " + h.to_string() + " does not extend mixture state " +
                              history_.to_string());
        std::vector<double> lw = log_post_;
        History prefix = h.prefix(history_.size());
        for (std::size_t k = history_.size(); k < h.size(); ++k) {
            const History ha = prefix.with_action(h[k].action);
            std::vector<double> likelihood(members_.size());
            for (std::size_t i = 0; i < members_.size(); ++i)
                likelihood[i] = members_[i]->conditional(ha).at(h[k].percept.observation);
            // A xi-null prefix admits any subprobability; report zero mass.
            if (!advance(lw, likelihood)) return std::vector<double>(percept_count(), 0.0);
            prefix = prefix.append(h[k].action, h[k].percept);
        }
        return blend(lw, h);
    }

private:
    // Matches on actions and observations only, so reward-shifted views stay in sync.
    bool extends_state(const History& h) const {
        for (std::size_t k = 0; k < history_.size(); ++k)
            if (h[k].action != history_[k].action || h[k].percept.observation != history_[k].percept.observation)
                return false;
        return true;
    }

    std::vector<double> blend(const std::vector<double>& log_w, const History& h) const {
        std::vector<double> out(percept_count(), 0.0);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (log_w[i] == detail::kNegInf) continue;
            const double w = std::exp(log_w[i]);
            const auto cond = members_[i]->conditional(h);
            for (std::size_t e = 0; e < out.size(); ++e) out[e] += w * cond[e];
        }
        return out;
    }

    // w_i <- w_i * nu_i(e) / xi(e), in log space. False when xi(e) = 0.
    static bool advance(std::vector<double>& log_w, const std::vector<double>& likelihood) {
        for (std::size_t i = 0; i < log_w.size(); ++i)
            log_w[i] += likelihood[i] > 0.0 ? std::log(likelihood[i]) : detail::kNegInf;
        const double log_xi = detail::log_sum_exp(log_w);
        if (log_xi == detail::kNegInf) return false;
        for (double& x : log_w) x -= log_xi;
        return true;
    }

    std::vector<EnvPtr> members_;
    std::vector<std::string> names_;
    std::vector<double> log_prior_;
    std::vector<double> log_joint_;
    std::vector<double> log_post_;
    History history_;
};

inline std::vector<double> predict(const Mixture& m, const History& h) { return m.predict(h); }

inline Mixture update(const Mixture& m, ActionId a, Percept e) { return m.update(a, e); }

inline double posterior_ratio(const Mixture& m, std::size_t i, std::size_t j) { return m.posterior_ratio(i, j); }

/// 1 - sum of xi(. | h); equals the posterior-weighted member losses.
inline MeasureLoss mixture_measure_loss(const Mixture& m, const History& h) {
    const auto xi = m.predict(h);
    return {std::clamp(1.0 - detail::mass(xi), 0.0, 1.0)};
}

}  // namespace mortal

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "mortal/envs.hpp"
#include "mortal/mixture.hpp"
#include "mortal/planner.hpp"
#include "test_support.hpp"

namespace mortal {
namespace {

using testing::iterative_value;
using testing::random_policy;

Policy constant(ActionId a) {
    return [a](const History&) { return a; };
}

TEST(ValueOfPolicy, FullLossActionIsWorthExactlyZero) {
    const auto cliff = make_cliff(0.5);
    for (std::size_t m = 1; m <= 12; ++m)
        for (const Policy& pi : {constant(envs::kStay), constant(envs::kJump)})
            EXPECT_EQ(value_of_policy(*cliff, pi, History{}.with_action(envs::kJump), {0.9, m}), 0.0);
}

TEST(ValueOfPolicy, ConstantRewardSafeEnvironment) {
    const auto env = make_bernoulli_risk(1.0, 0.5);
    for (double g : {0.1, 0.5, 0.9})
        for (std::size_t m : {1u, 3u, 15u}) EXPECT_NEAR(value_of_policy(*env, constant(0), History{}, {g, m}), 0.5, 1e-12);
}

TEST(ValueOfPolicy, BernoulliRiskMatchesDirectSummation) {
    const auto env = make_bernoulli_risk(0.9, 1.0);
    double num = 0.0, den = 0.0;
    for (int k = 1; k <= 20; ++k) {
        num += std::pow(0.5, k) * std::pow(0.9, k);
        den += std::pow(0.5, k);
    }
    const double v = value_of_policy(*env, constant(0), History{}, {0.5, 20});
    EXPECT_NEAR(v, num / den, 1e-9);
    EXPECT_NEAR(v, iterative_value(*env, constant(0), History{}, 0.5, 20), 1e-9);
}

TEST(ValueOfPolicy, LongHistoriesDoNotUnderflow) {
    const auto env = make_bernoulli_risk(0.9, 1.0);
    History h;
    for (int t = 0; t < 1500; ++t) h = h.append(0, {0, 1.0});
    const DiscountSchedule d(0.5, 20);
    const double v = value_of_policy(*env, constant(0), h, d);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, value_of_policy(*env, constant(0), History{}, d), 1e-12);
}

class RandomEnvironments : public ::testing::TestWithParam<std::uint64_t> {
protected:
    EnvPtr env() const { return make_random_semimeasure(GetParam(), 1 + GetParam() % 3, 1 + (GetParam() / 3) % 3, 4); }
    // brute-force policy enumeration grows as |A|^(|E| + |E|^2); keep it to two percepts
    EnvPtr small_env() const { return make_random_semimeasure(GetParam(), 1 + GetParam() % 3, 1 + (GetParam() / 3) % 2, 4); }
};

TEST_P(RandomEnvironments, RecursionMatchesUnrolledSum) {
    const auto e = env();
    for (std::uint64_t p = 0; p < 5; ++p) {
        const auto pi = random_policy(GetParam() * 17 + p, e->action_count());
        for (std::size_t m = 1; m <= 4; ++m) {
            EXPECT_NEAR(value_of_policy(*e, pi, History{}, {0.8, m}), iterative_value(*e, pi, History{}, 0.8, m), 1e-9);
            const History start = History{}.append(0, e->alphabet().percept(0));
            EXPECT_NEAR(value_of_policy(*e, pi, start, {0.8, m}), iterative_value(*e, pi, start, 0.8, m), 1e-9);
        }
    }
}

TEST_P(RandomEnvironments, DeathStateTwinHasTheSameValue) {
    const auto e = env();
    const auto twin = augment_death_state(e);
    for (std::uint64_t p = 0; p < 10; ++p) {
        const auto pi = random_policy(GetParam() * 31 + p, e->action_count());
        for (std::size_t m = 1; m <= 4; ++m)
            EXPECT_NEAR(value_of_policy(*e, pi, History{}, {0.7, m}), value_of_policy(*twin, pi, History{}, {0.7, m}), 1e-9);
    }
}

TEST_P(RandomEnvironments, ExpectimaxMatchesBruteForcePolicies) {
    const auto e = small_env();
    const auto [action, result] = optimal_action(*e, History{}, {0.9, 3});
    const auto oracle = testing::brute_force_action_values(*e, 0.9, 3);
    ASSERT_EQ(result.per_action.size(), oracle.size());
    for (std::size_t a = 0; a < oracle.size(); ++a) EXPECT_NEAR(result.per_action[a], oracle[a], 1e-9);
    EXPECT_EQ(result.value, result.per_action[action]);
}

TEST_P(RandomEnvironments, ArgmaxSurvivesRewardShiftOnProperMeasures) {
    const auto proper = normalize(small_env());
    const auto before = testing::brute_force_action_values(*proper, 0.9, 3);
    const auto after = testing::brute_force_action_values(*shift_rewards(proper, 2.5), 0.9, 3);
    const auto argmax = [](const std::vector<double>& v) {
        return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    EXPECT_EQ(argmax(before), argmax(after));
    EXPECT_EQ(optimal_action(*proper, History{}, {0.9, 3}).first, argmax(before));
    EXPECT_EQ(optimal_action(*shift_rewards(proper, 2.5), History{}, {0.9, 3}).first, argmax(before));
    EXPECT_EQ(optimal_action(*shift_rewards(proper, 0.0), History{}, {0.9, 3}).second.per_action,
              optimal_action(*proper, History{}, {0.9, 3}).second.per_action);
}

TEST_P(RandomEnvironments, Deterministic) {
    const auto e = env();
    const auto first = optimal_action(*e, History{}, {0.9, 4});
    for (int i = 0; i < 3; ++i) {
        const auto again = optimal_action(*e, History{}, {0.9, 4});
        EXPECT_EQ(again.first, first.first);
        EXPECT_EQ(again.second.per_action, first.second.per_action);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomEnvironments, ::testing::Range<std::uint64_t>(1, 25));

TEST(OptimalAction, CliffWithNonNegativeRewardsStays) {
    for (double r : {0.5, 1.0, 1e-6})
        for (std::size_t m : {1u, 2u, 10u}) {
            const auto [a, v] = optimal_action(*make_cliff(r), History{}, {0.9, m});
            EXPECT_EQ(a, envs::kStay);
            EXPECT_EQ(v.per_action[envs::kJump], 0.0);
            EXPECT_GT(v.per_action[envs::kStay], 0.0);
        }
}

TEST(OptimalAction, CliffWithNegativeRewardsJumps) {
    for (double r : {-0.5, -1.0, -1e-6})
        for (std::size_t m : {1u, 2u, 10u}) {
            const auto [a, v] = optimal_action(*make_cliff(r), History{}, {0.9, m});
            EXPECT_EQ(a, envs::kJump);
            EXPECT_EQ(v.value, 0.0);
        }
    EXPECT_EQ(optimal_action(*shift_rewards(make_cliff(0.5), -1.0), History{}, {0.9, 10}).first, envs::kJump);
}

TEST(OptimalAction, SingleActionEnvironment) {
    EXPECT_EQ(optimal_action(*make_bernoulli_risk(0.3, -2.0), History{}, {0.9, 5}).first, 0u);
}

TEST(OptimalAction, TiesGoToLowestIndex) {
    const auto env = testing::single_layer_table({1.0}, {{0.5}, {0.5}, {0.5}});
    const auto [a, v] = optimal_action(*env, History{}, {0.9, 4});
    EXPECT_EQ(a, 0u);
    EXPECT_EQ(v.per_action[0], v.per_action[2]);
}

TEST(OptimalAction, RejectsPendingHistory) {
    EXPECT_THROW(optimal_action(*make_cliff(0.5), History{}.with_action(0), {0.9, 2}), StructuralMisuse);
}

TEST(AixiLike, SingleMemberMixtureActsLikeAImu) {
    for (std::uint64_t seed = 1; seed < 10; ++seed) {
        const auto env = make_random_semimeasure(seed, 3, 2, 3);
        const Mixture m({env}, {1.0});
        const auto mu = optimal_action(*env, History{}, {0.9, 3});
        const auto xi = aixi_like_action(m, History{}, {0.9, 3});
        EXPECT_EQ(mu.first, xi.first);
        for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(mu.second.per_action[a], xi.second.per_action[a], 1e-12);
    }
}

// Hand expectimax at horizon 2, gamma 0.9 (window weights 1 and 0.9):
//   stay: alive reward r on both steps              -> r
//   jump: xi survives w.p. 0.5 (safe member only), then the posterior sits
//         on the safe member and any action survives -> 0.5 (r + 0.9 r) / 1.9 = r / 2
// With r = -0.5 staying is followed by the better second-step jump (-0.25):
//   stay: (-0.5 + 0.9 * -0.25) / 1.9 = -0.725 / 1.9
TEST(AixiLike, RiskyCliffMixturePrefersToStayWithPositiveRewards) {
    const auto cliff = make_cliff(0.5);
    const Mixture m = Mixture::uniform({cliff, normalize(cliff)});
    const auto [a, v] = aixi_like_action(m, History{}, {0.9, 2});
    EXPECT_EQ(a, envs::kStay);
    EXPECT_NEAR(v.per_action[envs::kStay], 0.5, 1e-12);
    EXPECT_NEAR(v.per_action[envs::kJump], 0.25, 1e-12);
}

TEST(AixiLike, RiskyCliffMixtureJumpsWithNegativeRewards) {
    const auto cliff = shift_rewards(make_cliff(0.5), -1.0);
    const Mixture m = Mixture::uniform({cliff, normalize(cliff)});
    const auto [a, v] = aixi_like_action(m, History{}, {0.9, 2});
    EXPECT_EQ(a, envs::kJump);
    EXPECT_NEAR(v.per_action[envs::kStay], -0.725 / 1.9, 1e-12);
    EXPECT_NEAR(v.per_action[envs::kJump], -0.25, 1e-12);
}

TEST(AixiLike, DesyncIsRejected) {
    const auto cliff = make_cliff(0.5);
    const Mixture m = Mixture::uniform({cliff, normalize(cliff)});
    EXPECT_THROW(aixi_like_action(m, History{}.append(0, {0, 0.5}), {0.9, 2}), StateDesync);
}

}  // namespace
}  // namespace mortal

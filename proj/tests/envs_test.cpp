#include <gtest/gtest.h>

#include "mortal/envs.hpp"
#include "mortal/semimeasure.hpp"

namespace mortal {
namespace {

History all_stay(std::size_t n, double reward) {
    History h;
    for (std::size_t i = 0; i < n; ++i) h = h.append(envs::kStay, {0, reward});
    return h;
}

TEST(Cliff, JumpLosesAllMassStayLosesNone) {
    const auto cliff = make_cliff(0.5);
    for (std::size_t t = 0; t < 20; ++t) {
        const History h = all_stay(t, 0.5);
        EXPECT_EQ(measure_loss(*cliff, h.with_action(envs::kJump)).value, 1.0);
        EXPECT_EQ(measure_loss(*cliff, h.with_action(envs::kStay)).value, 0.0);
    }
}

TEST(Cliff, PerceptCarriesAliveReward) {
    const auto cliff = make_cliff(0.5);
    EXPECT_EQ(cliff->action_count(), 2u);
    EXPECT_EQ(cliff->percept_count(), 1u);
    EXPECT_EQ(cliff->alphabet().reward(0), 0.5);
    EXPECT_EQ(make_cliff(-0.5)->alphabet().reward(0), -0.5);
    EXPECT_THROW(make_cliff(std::numeric_limits<double>::infinity()), ParameterError);
}

TEST(BernoulliRisk, ConstantLoss) {
    const auto env = make_bernoulli_risk(0.9, 1.0);
    for (std::size_t t = 0; t < 10; ++t)
        EXPECT_NEAR(measure_loss(*env, all_stay(t, 1.0).with_action(0)).value, 0.1, 1e-15);
    EXPECT_EQ(measure_loss(*make_bernoulli_risk(1.0, 1.0), History{}.with_action(0)).value, 0.0);
}

TEST(BernoulliRisk, RejectsOutOfRangeProbability) {
    EXPECT_THROW(make_bernoulli_risk(0.0, 1.0), ParameterError);
    EXPECT_THROW(make_bernoulli_risk(1.5, 1.0), ParameterError);
    EXPECT_THROW(make_bernoulli_risk(-0.1, 1.0), ParameterError);
}

TEST(BernoulliRisk, NormalizationIsTheSafeEnvironment) {
    const auto norm = normalize(make_bernoulli_risk(0.9, 0.7));
    const auto safe = make_bernoulli_risk(1.0, 0.7);
    for (std::size_t t = 0; t < 5; ++t) {
        const History h = all_stay(t, 0.7).with_action(0);
        EXPECT_EQ(norm->conditional(h), safe->conditional(h));
    }
    EXPECT_EQ(norm->alphabet(), safe->alphabet());
}

TEST(RandomSemimeasure, SameSeedSameConditionals) {
    const auto a = make_random_semimeasure(42, 3, 3, 4);
    const auto b = make_random_semimeasure(42, 3, 3, 4);
    EXPECT_EQ(a->alphabet(), b->alphabet());
    History h;
    for (int t = 0; t < 6; ++t) {
        for (ActionId act = 0; act < 3; ++act) EXPECT_EQ(a->conditional(h.with_action(act)), b->conditional(h.with_action(act)));
        h = h.append(t % 3, a->alphabet().percept((t * 2) % 3));
    }
}

TEST(RandomSemimeasure, ValidToDeclaredDepth) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t depth = 1 + seed % 4;
        const auto env = make_random_semimeasure(seed, 1 + seed % 4, 1 + (seed / 4) % 4, depth);
        EXPECT_TRUE(validate(*env, depth).empty()) << "seed " << seed;
    }
}

TEST(RandomSemimeasure, DistinctSeedsDiffer) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = make_random_semimeasure(2 * seed, 2, 2, 3);
        const auto b = make_random_semimeasure(2 * seed + 1, 2, 2, 3);
        bool differs = !(a->alphabet() == b->alphabet());
        for (ActionId act = 0; act < 2; ++act)
            differs = differs || a->conditional(History{}.with_action(act)) != b->conditional(History{}.with_action(act));
        EXPECT_TRUE(differs) << "seed pair " << 2 * seed;
    }
}

TEST(RandomSemimeasure, DeepHistoriesRepeatTheDeepestLayer) {
    const auto env = make_random_semimeasure(7, 2, 2, 3);
    const History shallow = History{}.append(0, env->alphabet().percept(1)).append(1, env->alphabet().percept(0));
    const History deep = shallow.append(1, env->alphabet().percept(1)).append(0, env->alphabet().percept(0));
    EXPECT_EQ(env->conditional(shallow.with_action(1)), env->conditional(deep.with_action(1)));
}

TEST(RandomSemimeasure, RejectsOversizedTables) {
    EXPECT_THROW(make_random_semimeasure(1, 5, 2, 3), ParameterError);
    EXPECT_THROW(make_random_semimeasure(1, 2, 5, 3), ParameterError);
    EXPECT_THROW(make_random_semimeasure(1, 2, 2, 7), ParameterError);
    EXPECT_THROW(make_random_semimeasure(1, 0, 2, 3), ParameterError);
}

TEST(Table, DeepestLayerRepeats) {
    using Layer = envs::TableEnvironment::Layer;
    const envs::TableEnvironment env(PerceptAlphabet({1.0}), 1, {Layer{{0.5}}, Layer{{0.25}}}, "two-layer");
    EXPECT_EQ(env.conditional(History{}.with_action(0))[0], 0.5);
    EXPECT_EQ(env.conditional(all_stay(1, 1.0).with_action(0))[0], 0.25);
    EXPECT_EQ(env.conditional(all_stay(9, 1.0).with_action(0))[0], 0.25);
}

TEST(Table, ShapeIsChecked) {
    using Layer = envs::TableEnvironment::Layer;
    EXPECT_THROW(envs::TableEnvironment(PerceptAlphabet({1.0}), 2, {Layer{{0.5}}}, "bad"), ParameterError);
    EXPECT_THROW(envs::TableEnvironment(PerceptAlphabet({1.0}), 1, {Layer{{0.5, 0.1}}}, "bad"), ParameterError);
}

TEST(ShiftRewards, OnlyRewardsMove) {
    const auto cliff = make_cliff(0.5);
    const auto shifted = shift_rewards(cliff, -1.0);
    EXPECT_EQ(shifted->alphabet().reward(0), -0.5);
    EXPECT_EQ(shifted->conditional(History{}.with_action(envs::kJump)), cliff->conditional(History{}.with_action(envs::kJump)));
    EXPECT_EQ(shift_rewards(cliff, 0.0)->alphabet(), cliff->alphabet());
}

}  // namespace
}  // namespace mortal

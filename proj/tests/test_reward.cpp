#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "mirl/reward.hpp"
#include "mirl/seeding.hpp"

using namespace mirl;
using mirl::testing::fd_max_relative_error;
using mirl::testing::gradient_fixture;

namespace {

AugmentedFeatureVector random_input(Rng& rng) {
  AugmentedFeatureVector f{};
  for (double& v : f) v = 2.0 * uniform01(rng) - 1.0;
  return f;
}

}  // namespace

TEST(RewardLinear, ZeroWeights) {
  const FeatureVector phi{0.3, -1, 1, 0.2, 1, 0, 0};
  EXPECT_EQ(reward_linear(LinearParams{}, phi), 0.0);
}

TEST(RewardLinear, UnitVectorSelects) {
  const FeatureVector phi{0.3, -1, 0.7, 0.2, 1, 0, 0};
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    LinearParams p;
    p.theta[i] = 1.0;
    EXPECT_EQ(reward_linear(p, phi), phi[i]);
  }
}

TEST(RewardLinear, HandDotProduct) {
  const LinearParams p{{1, 2, -1, 0, -10, -10, -10}};
  const FeatureVector phi{1, 0.5, -1, 1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(reward_linear(p, phi), 3.0);
}

TEST(RewardLinear, DimensionMismatchThrows) {
  const std::vector<double> short_input(6, 0.0);
  EXPECT_THROW(reward_linear(LinearParams{}, short_input), std::invalid_argument);
}

TEST(RewardMlp, ZeroFirstLayer) {
  MlpParams p(4);
  p.w2 = {1, -2, 3, 4};
  Rng rng = make_rng(1);
  EXPECT_EQ(reward_mlp(p, random_input(rng)), 0.0);
}

TEST(RewardMlp, SingleUnitIsRelu) {
  for (std::size_t i = 0; i < kNumAugmented; ++i) {
    MlpParams p(1);
    p.w1[i] = 1.0;
    p.w2 = {1.0};
    AugmentedFeatureVector f{};
    f[i] = 0.6;
    EXPECT_DOUBLE_EQ(reward_mlp(p, f), 0.6);
    f[i] = -0.6;
    EXPECT_EQ(reward_mlp(p, f), 0.0);
  }
}

TEST(RewardMlp, MatchesNaiveMatrixOracle) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const RewardModel m = RewardModel::random_mlp(7, derive_seed(5, {static_cast<std::uint64_t>(trial)}));
    const AugmentedFeatureVector f = random_input(rng);
    const MlpParams& p = m.mlp();
    double hidden[7];
    for (int h = 0; h < 7; ++h) {
      hidden[h] = 0.0;
      for (std::size_t i = 0; i < kNumAugmented; ++i)
        hidden[h] += p.w1[static_cast<std::size_t>(h) * kNumAugmented + i] * f[i];
      hidden[h] = hidden[h] > 0.0 ? hidden[h] : 0.0;
    }
    double r = 0.0;
    for (int h = 0; h < 7; ++h) r += p.w2[static_cast<std::size_t>(h)] * hidden[h];
    EXPECT_NEAR(reward_mlp(p, f), r, 1e-12);
  }
}

TEST(RewardMlp, RejectsBadShapes) {
  EXPECT_THROW(MlpParams(0), std::invalid_argument);
  const std::vector<double> seven(7, 0.0);
  EXPECT_THROW(reward_mlp(MlpParams(2), seven), std::invalid_argument);
}

TEST(ReturnOf, ZeroModel) {
  Rng rng = make_rng(2);
  const std::vector<AugmentedFeatureVector> steps{random_input(rng), random_input(rng)};
  EXPECT_EQ(return_of(RewardModel(LinearParams{}), steps, 0.9), 0.0);
}

TEST(ReturnOf, ConstantRewardIsNormalizedAway) {
  LinearParams p;
  p.theta[kDesVelocity] = 1.0;
  AugmentedFeatureVector f{};
  f[kDesVelocity] = 0.4;
  const std::vector<AugmentedFeatureVector> steps(6, f);
  EXPECT_DOUBLE_EQ(return_of(RewardModel(p), steps, 1.0), 0.4);
}

TEST(ReturnOf, DiscountedHandSum) {
  // r_t = t via the selector weight on desLane.
  LinearParams p;
  p.theta[kDesLane] = 1.0;
  std::vector<AugmentedFeatureVector> steps(3);
  for (std::size_t t = 0; t < 3; ++t) steps[t][kDesLane] = static_cast<double>(t);
  EXPECT_NEAR(return_of(RewardModel(p), steps, 0.5), 1.0 / 3.0, 1e-15);
}

TEST(ReturnOf, EmptyThrows) {
  EXPECT_THROW(return_of(RewardModel(LinearParams{}), std::vector<AugmentedFeatureVector>{}, 1.0),
               std::invalid_argument);
}

TEST(GradReturn, LinearSingleStepIsFeatures) {
  Rng rng = make_rng(3);
  const std::vector<AugmentedFeatureVector> steps{random_input(rng)};
  const auto g = grad_return(RewardModel::random_linear(4), steps, 1.0);
  for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_EQ(g[i], steps[0][i]);
}

TEST(GradReturn, DeadReluGivesZero) {
  MlpParams p(3);
  for (double& w : p.w1) w = -1.0;
  p.w2 = {1, 2, 3};
  AugmentedFeatureVector f{};
  f.fill(0.5);
  const std::vector<AugmentedFeatureVector> steps{f, f};
  for (double g : grad_return(RewardModel(p), steps, 1.0)) EXPECT_EQ(g, 0.0);
}

TEST(GradReturn, SubgradientAtKinkIsZero) {
  MlpParams p(1);
  p.w1[0] = 1.0;
  p.w2 = {2.0};
  const std::vector<AugmentedFeatureVector> steps{AugmentedFeatureVector{}};
  for (double g : grad_return(RewardModel(p), steps, 1.0)) EXPECT_EQ(g, 0.0);
}

TEST(GradReturn, LinearMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 50; ++s)
    EXPECT_LT(fd_max_relative_error(gradient_fixture(s, false)), 1e-5) << "seed " << s;
}

TEST(GradReturn, MlpMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 50; ++s)
    EXPECT_LT(fd_max_relative_error(gradient_fixture(s, true)), 1e-5) << "seed " << s;
}

TEST(ReturnProperties, LinearInWeights) {
  Rng rng = make_rng(8);
  std::vector<AugmentedFeatureVector> steps;
  for (int t = 0; t < 9; ++t) steps.push_back(random_input(rng));
  const RewardModel a = RewardModel::random_linear(1), b = RewardModel::random_linear(2);
  const double alpha = 0.7, beta = -1.3;
  LinearParams c;
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    c.theta[i] = alpha * a.linear().theta[i] + beta * b.linear().theta[i];
  EXPECT_NEAR(return_of(RewardModel(c), steps, 0.9),
              alpha * return_of(a, steps, 0.9) + beta * return_of(b, steps, 0.9), 1e-12);
}

TEST(ReturnProperties, BoundedByL1Norm) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto fx = gradient_fixture(s, false);
    double l1 = 0.0;
    for (double t : fx.model.linear().theta) l1 += std::abs(t);
    EXPECT_LE(std::abs(return_of(fx.model, fx.steps, 1.0)), l1 + 1e-12);
  }
}

TEST(RewardModel, InitializationRanges) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (double t : RewardModel::random_linear(s).params()) {
      EXPECT_GE(t, -1.0);
      EXPECT_LE(t, 1.0);
    }
    const RewardModel m = RewardModel::random_mlp(16, s);
    EXPECT_EQ(m.param_count(), 16u * 10u + 16u);
    for (double w : m.mlp().w1) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(10.0));
    for (double w : m.mlp().w2) EXPECT_LE(std::abs(w), 0.25);
  }
  EXPECT_EQ(RewardModel::random_linear(3).params(), RewardModel::random_linear(3).params());
}

TEST(RewardModel, FlatParamLayoutRoundTrip) {
  RewardModel m = RewardModel::random_mlp(3, 9);
  ParamVector p = m.params();
  ASSERT_EQ(p.size(), 33u);
  // Entry (row 1, col 2) of w1 sits at 1 * 10 + 2; w2 follows w1.
  EXPECT_EQ(p[12], m.mlp().w1[12]);
  EXPECT_EQ(p[30], m.mlp().w2[0]);
  p[31] = 42.0;
  m.set_params(p);
  EXPECT_EQ(m.mlp().w2[1], 42.0);
  EXPECT_THROW(m.set_params(ParamVector(5)), std::invalid_argument);
}

TEST(Checkpoint, RoundTripBothKinds) {
  for (const RewardModel& m : {RewardModel::random_linear(1), RewardModel::random_mlp(5, 2)}) {
    const Checkpoint c{m, 17};
    const Checkpoint back = checkpoint_from_json(checkpoint_to_json(c));
    EXPECT_EQ(back.step, 17);
    EXPECT_EQ(back.model.kind(), m.kind());
    EXPECT_EQ(back.model.params(), m.params());
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "mirl_ckpt_test.json";
  const Checkpoint c{RewardModel::random_mlp(4, 6), 3};
  save_checkpoint(c, path.string());
  EXPECT_EQ(load_checkpoint(path.string()).model.params(), c.model.params());
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path.string()), ConfigError);
}

TEST(Checkpoint, MalformedInputIsConfigError) {
  EXPECT_THROW(checkpoint_from_json("not json"), ConfigError);
  EXPECT_THROW(checkpoint_from_json(R"({"kind":"linear","step":0,"theta":[1,2]})"), ConfigError);
  EXPECT_THROW(checkpoint_from_json(R"({"kind":"tree","step":0})"), ConfigError);
  EXPECT_THROW(
      checkpoint_from_json(R"({"kind":"mlp","step":0,"dims":{"hidden":2},"w1":[1],"w2":[1,2]})"),
      ConfigError);
}

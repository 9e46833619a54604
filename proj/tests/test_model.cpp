#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hetnet/model.hpp"

using namespace hetnet;

TEST(Model, FourTierAccepted) {
  const auto vm = validate(fixtures::four_tier());
  EXPECT_EQ(vm.size(), 4u);
  EXPECT_FALSE(vm.tier(0).contends());
  EXPECT_EQ(vm.derived(0).xi, 0.0);
  // zeta = 3.5 exp(a^2 sigma^2) with a = 1/2 for a log-normal weight.
  const double s = db_to_ln(3.0);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(vm.derived(k).zeta, 3.5 * std::exp(0.25 * s * s), 1e-9);
}

TEST(Model, ConstantWeightGivesBaseZeta) {
  auto n = fixtures::identical(2, 1e-4, 1e-4);
  const auto vm = validate(n);
  EXPECT_DOUBLE_EQ(vm.derived(0).zeta, 3.5);
  EXPECT_DOUBLE_EQ(vm.derived(0).weight_mean, 1.0);
  EXPECT_DOUBLE_EQ(zeta(n.tiers[0], 4.0), 3.5);
}

TEST(Model, PathlossExponentTwoRejected) {
  auto n = fixtures::four_tier();
  n.pathloss_exponent = 2.0;
  EXPECT_THROW(validate(n), DomainError);
}

TEST(Model, DomainViolations) {
  auto n = fixtures::four_tier();
  n.tiers[1].intensity = 0.0;
  EXPECT_THROW(validate(n), DomainError);
  n = fixtures::four_tier();
  n.tiers.resize(1);
  EXPECT_THROW(validate(n), DomainError);
  n = fixtures::four_tier();
  n.tiers[2].sensing_area = 0.0;
  EXPECT_THROW(validate(n), DomainError);
  n = fixtures::four_tier();
  n.bandwidth_unlicensed = 0.0;
  EXPECT_THROW(validate(n), DomainError);
}

TEST(Model, BackoffOrderingEnforced) {
  auto n = fixtures::four_tier();
  n.tiers[3].max_backoff = 3.0;
  EXPECT_THROW(validate(n), OrderingViolation);
}

TEST(Model, MissingNegativeMomentRejected) {
  // A weight with an atom at zero has no finite E[W^{-2/alpha}].
  auto n = fixtures::identical(2, 1e-4, 1e-4);
  n.tiers[0].weight.kind = WeightModel::Kind::random;
  n.tiers[0].weight.distribution =
      ChannelModel::tabulated({0.0, 1.0}, {0.5, 0.5});
  EXPECT_THROW(validate(n), NonFiniteMoment);
}

TEST(Model, XiIsTailAndMonotone) {
  const auto vm = validate(fixtures::four_tier());
  const auto &ch = vm.tier(1).unlicensed_channel;
  EXPECT_NEAR(vm.derived(1).xi, ch.tail(4.481), 1e-15);
  double prev = 1.0;
  for (double d : {0.01, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double x = validate(fixtures::four_tier(d)).derived(2).xi;
    EXPECT_LE(x, prev + 1e-15);
    prev = x;
  }
  EXPECT_NEAR(ch.tail(0.0), 1.0, 1e-12);
}

TEST(Model, FadingOnlyThreshold) {
  auto n = fixtures::four_tier();
  n.threshold_gain = ThresholdGain::fading_only;
  EXPECT_NEAR(validate(n).derived(2).xi, std::exp(-4.481), 1e-15);
}

TEST(Model, CommonWeightScaleKeepsRatios) {
  const auto vm = validate(fixtures::four_tier());
  const auto scaled = vm.with_weight_scale(17.0);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(scaled.derived(k).zeta, vm.derived(k).zeta, 1e-12);
    EXPECT_NEAR(scaled.derived(k).omega / scaled.derived(0).omega,
                vm.derived(k).omega / vm.derived(0).omega, 1e-12);
  }
}

TEST(Model, WithOmegasRoundTrips) {
  const auto vm = validate(fixtures::four_tier());
  auto w = vm.omegas();
  w[1] *= 3.0;
  const auto next = vm.with_omegas(w);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(next.omegas()[k], w[k], 1e-12 * w[k]);
  EXPECT_THROW(vm.with_omegas({1.0}), DomainError);
}

TEST(Model, InverseBiasLeavesLastTier) {
  const auto vm = validate(fixtures::four_tier()).with_inverse_bias(4.0);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_DOUBLE_EQ(vm.tier(k).weight.bias, 0.25);
  EXPECT_DOUBLE_EQ(vm.tier(3).weight.bias, 1.0);
}

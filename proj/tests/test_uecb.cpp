#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "eqbandit/env/linear_contraction.hpp"
#include "eqbandit/uecb.hpp"

namespace eqbandit {
namespace {

UecbParams params_with(double rho1, double rho2, UecbMode mode = UecbMode::kNoisy,
                       ConvergenceKnowledge k = {}) {
  UecbParams p;
  p.rho1 = rho1;
  p.rho2 = rho2;
  p.mode = mode;
  p.knowledge = k;
  return p;
}

TEST(EpochLengthTest, DoublingSchedule) {
  const auto p = params_with(std::log(2.0), 1.0);
  EXPECT_EQ(epoch_length(0, p), 4);
  EXPECT_EQ(epoch_length(2, p), 16);
  for (int m = 0; m < 20; ++m) EXPECT_EQ(epoch_length(m, p), 2LL << (m + 1)) << m;
}

TEST(EpochLengthTest, RoundsUpToEven) {
  // 2e = 5.43656... -> 6.
  EXPECT_EQ(epoch_length(1, params_with(0.5, 1.0)), 6);
  EXPECT_EQ(epoch_length(0, params_with(0.01, 0.1)), 2);
}

TEST(EpochLengthTest, Errors) {
  const auto p = params_with(std::log(2.0), 1.0);
  EXPECT_THROW(epoch_length(-1, p), InvalidInput);
  EXPECT_THROW(epoch_length(100, p), ScheduleOverflow);
}

TEST(IndexTest, NoiselessExamples) {
  EXPECT_NEAR(noiseless_index(0.2, 4, {2.0, 1.0, 0.0}), 0.335335283236613, 1e-12);
  EXPECT_NEAR(noiseless_index(0.5, 3, {3.0, 1.0, 0.0}), 0.867879441171442, 1e-12);
  EXPECT_DOUBLE_EQ(noiseless_index(0.4, 7, {3.0, 0.0, 0.0}), 0.4);
}

TEST(IndexTest, EquilibriumNoiseTerm) {
  const ConvergenceKnowledge k{1.0, 1.0, 0.0};
  EXPECT_NEAR(equilibrium_noise_term(4, k), 0.03938, 1e-5);
  EXPECT_NEAR(equilibrium_noise_term(4, k), 0.0393809912306357, 1e-12);
  EXPECT_EQ(equilibrium_noise_term(4, {1.0, 0.0, 0.0}), 0.0);
}

TEST(IndexTest, ConfidenceRadius) {
  EXPECT_NEAR(confidence_radius(8, 1.0, 1e-3), 1.94947460352041, 1e-12);
  EXPECT_EQ(confidence_radius(8, 0.0, 1e-3), 0.0);
  EXPECT_NEAR(confidence_radius(4, 1.0, 2.0 / std::exp(1.0)), 1.0, 1e-15);
  EXPECT_THROW(confidence_radius(8, 1.0, 0.0), InvalidInput);
  EXPECT_THROW(confidence_radius(8, 1.0, 2.0), InvalidInput);
  EXPECT_THROW(confidence_radius(1, 1.0, 0.5), InvalidInput);
}

TEST(IndexTest, NoisyIndexIsSumOfParts) {
  const ConvergenceKnowledge k{3.0, 2.0, 0.4};
  const double d = confidence_level(40);
  EXPECT_DOUBLE_EQ(noisy_index(0.3, 16, k, d),
                   0.3 + equilibrium_noise_term(16, k) + confidence_radius(16, 0.4, d));
  EXPECT_DOUBLE_EQ(confidence_level(10), 1e-3);
}

TEST(UpdateTest, NoisySecondHalfMean) {
  const auto p = params_with(std::log(2.0), 1.0, UecbMode::kNoisy, {1.0, 1.0, 0.1});
  const std::vector<double> r{0.0, 0.0, 1.0, 1.0};
  const auto s = update_after_epoch(EpochState::initial(2), ActionId(1), r, p);
  EXPECT_DOUBLE_EQ(s.x_hat[0], 1.0);
  EXPECT_EQ(s.epochs[0], 1);
  EXPECT_EQ(s.t, 4);
  EXPECT_EQ(s.n, 1);
  EXPECT_TRUE(std::isinf(s.index[1]));
}

TEST(UpdateTest, NoiselessLastReward) {
  auto p = params_with(std::log(2.0), 0.5, UecbMode::kNoiseless);
  EXPECT_EQ(epoch_length(0, p), 2);
  const std::vector<double> r{0.1, 0.9};
  const auto s = update_after_epoch(EpochState::initial(1), ActionId(1), r, p);
  EXPECT_DOUBLE_EQ(s.x_hat[0], 0.9);
  EXPECT_DOUBLE_EQ(s.index[0], 0.9 + std::exp(-2.0));
}

TEST(UpdateTest, RejectsWrongLength) {
  const auto p = params_with(std::log(2.0), 1.0);
  const std::vector<double> r{0.1, 0.2, 0.3};
  EXPECT_THROW(update_after_epoch(EpochState::initial(2), ActionId(1), r, p), InvalidInput);
  EXPECT_THROW(update_after_epoch(EpochState::initial(2), ActionId(3), r, p), InvalidInput);
}

// Three epochs on two arms with constant rewards, checked against indices
// recomputed by hand from the closed forms.
TEST(UpdateTest, ThreeEpochReplay) {
  const ConvergenceKnowledge k{2.0, 1.0, 0.2};
  const auto p = params_with(std::log(2.0), 1.0, UecbMode::kNoisy, k);
  auto s = EpochState::initial(2);
  s = update_after_epoch(s, ActionId(1), std::vector<double>(4, 0.6), p);
  s = update_after_epoch(s, ActionId(2), std::vector<double>(4, 0.3), p);
  s = update_after_epoch(s, ActionId(1), std::vector<double>(8, 0.7), p);
  EXPECT_EQ(s.t, 16);
  EXPECT_EQ(s.n, 3);
  const double delta = 1.0 / (16.0 * 16.0 * 16.0);
  auto expected = [&](double x, double l) {
    const double bias = (2.0 / l) * std::exp(-(1.0 + l / 2.0) / 2.0) / (1.0 - std::exp(-0.5));
    return x + bias + std::sqrt(4.0 * 0.04 / l * std::log(2.0 / delta));
  };
  EXPECT_NEAR(s.index[0], expected(0.7, 8.0), 1e-12);
  EXPECT_NEAR(s.index[1], expected(0.3, 4.0), 1e-12);
}

TEST(SelectTest, RoundRobinThenArgmax) {
  EXPECT_EQ(select_action(EpochState::initial(4), 4), ActionId(1));
  auto s = EpochState::initial(3);
  s.n = 1;
  EXPECT_EQ(select_action(s, 3), ActionId(2));
  s.n = 3;
  s.index = {0.3, 0.9, 0.5};
  EXPECT_EQ(select_action(s, 3), ActionId(2));
  EXPECT_THROW(select_action(s, 2), InvalidInput);
  auto two = EpochState::initial(2);
  two.n = 5;
  two.index = {0.7, 0.7};
  EXPECT_EQ(select_action(two, 2), ActionId(1));
}

TEST(EpochThresholdsTest, Thresholds) {
  EXPECT_NEAR(epoch_thresholds(1.0, 2.0 / std::exp(1.0), {1.0, 1.0, 1.0}).ell1, 64.0, 1e-12);
  EXPECT_EQ(epoch_thresholds(8.0, 0.5, {1.0, 1.0, 0.0}).ell2, 0.0);
  EXPECT_NEAR(epoch_thresholds(0.1, 0.5, {10.0, 1.0, 0.0}).ell2, 87.6405326934776, 1e-9);
  EXPECT_THROW(epoch_thresholds(0.0, 0.5, {}), InvalidInput);
}

TEST(PolicyTest, ScheduleConsistency) {
  const LinearContractionEnv env({LinearArm{0.2, 0.5, 0.7, 1.0}, LinearArm{-0.2, 0.5, 0.4, 1.0},
                                  LinearArm{0.0, 0.5, 0.5, 1.0}},
                                 0.0, 0.1);
  UecbParams p;
  p.knowledge = env.knowledge();
  UecbPolicy policy(3, p);
  Rng rng = make_rng(5, 0, Stream::kNoise);
  StateVector z = env.initial_state();
  for (int t = 0; t < 3000; ++t) {
    const ActionId a = policy.select();
    const auto r = step_environment(env, a, z, rng);
    policy.observe(a, r.noisy_reward);
    z = r.next_state;
  }
  const auto& st = policy.state();
  std::int64_t total = 0;
  std::vector<int> seen(3, 0);
  for (const auto& [a, len] : policy.epoch_log()) {
    EXPECT_EQ(len, epoch_length(seen[a.index()], p));
    ++seen[a.index()];
    total += len;
  }
  EXPECT_EQ(total, st.t);
  EXPECT_EQ(static_cast<std::int64_t>(policy.epoch_log().size()), st.n);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(seen[static_cast<std::size_t>(a)], st.epochs[static_cast<std::size_t>(a)]);
  EXPECT_EQ(policy.epoch_log()[0].first, ActionId(1));
  EXPECT_EQ(policy.epoch_log()[1].first, ActionId(2));
  EXPECT_EQ(policy.epoch_log()[2].first, ActionId(3));
}

TEST(PolicyTest, TruncatedEpochKeepsCounters) {
  UecbParams p;
  p.knowledge = {1.0, 1.0, 0.1};
  UecbPolicy policy(2, p);
  for (int t = 0; t < 6; ++t) {
    const ActionId a = policy.select();
    policy.observe(a, 0.5);
  }
  policy.finish();
  const auto& s = policy.state();
  EXPECT_EQ(s.t, 4);
  EXPECT_EQ(s.n, 1);
  EXPECT_EQ(s.epochs[1], 0);
  EXPECT_DOUBLE_EQ(s.x_hat[1], 0.5);
  EXPECT_TRUE(std::isfinite(s.index[1]));
}

TEST(PolicyTest, RejectsUnselectedAction) {
  UecbPolicy policy(2, UecbParams{});
  EXPECT_EQ(policy.select(), ActionId(1));
  EXPECT_THROW(policy.observe(ActionId(2), 0.0), InvalidInput);
}

}  // namespace
}  // namespace eqbandit

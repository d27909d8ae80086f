#pragma once

// Two-arm counterexamples. The breaker makes UCB alternate forever; the
// lower-bound pair hides the better arm behind ceil(tau_c log(1/gap)) zero
// rewards.

#include <array>
#include <cmath>
#include <string>

#include "eqbandit/core.hpp"

namespace eqbandit {

/// States {-1, -0.5, 0.5, 1.5}, f(a; z) = z^2, arm 1 settles at -1, arm 2 at
/// 1.5. Rewards leave [0,1], so the instance skips normalization and is only
/// meant for baseline-failure tests.
class UcbBreakerEnv final : public EnvironmentModel {
 public:
  static constexpr std::array<double, 4> kStates{-1.0, -0.5, 0.5, 1.5};

  UcbBreakerEnv()
      : EnvironmentModel(EnvironmentTraits{"ucb_breaker", 2, 1, 0.0, Norm::kAbs,
                                           ConvergenceKnowledge{2.0, 3.0, 0.0}, true}) {}

  StateVector initial_state() const override { return {0.5}; }

  StateVector sample_state(Rng& rng) const override {
    return {kStates[std::uniform_int_distribution<std::size_t>(0, kStates.size() - 1)(rng)]};
  }

 protected:
  StateVector evolve_unchecked(ActionId a, const StateVector& z) const override {
    const int s = state_slot(z[0]);
    // Arm 1 walks down the ladder to -1, arm 2 walks up to 1.5.
    static constexpr std::array<double, 4> kArm1{-1.0, -1.0, -0.5, -0.5};
    static constexpr std::array<double, 4> kArm2{0.5, 0.5, 1.5, 1.5};
    return {a.value == 1 ? kArm1[static_cast<std::size_t>(s)] : kArm2[static_cast<std::size_t>(s)]};
  }

  double reward_unchecked(ActionId, const StateVector& z) const override {
    state_slot(z[0]);
    return z[0] * z[0];
  }

 private:
  static int state_slot(double z) {
    for (std::size_t i = 0; i < kStates.size(); ++i)
      if (z == kStates[i]) return static_cast<int>(i);
    throw DomainError("ucb_breaker: state " + std::to_string(z) + " is not in the table");
  }
};

/// Arm 1: always reward 0, settles at -2. Arm 2: settles at 2 with reward
/// gap + z - 2 once z >= 2 - gap, 0 before. Switching arms resets the state to
/// -1 (arm 1) or 1 (arm 2), so both arms look identical for the first
/// ceil(tau_c log(1/gap)) plays.
class LowerBoundPairEnv final : public EnvironmentModel {
 public:
  static constexpr double kZ1 = -2.0;
  static constexpr double kZ2 = 2.0;

  LowerBoundPairEnv(double gap, double tau_c, double sigma = 0.0)
      : EnvironmentModel(EnvironmentTraits{"lower_bound", 2, 1, sigma, Norm::kAbs,
                                           ConvergenceKnowledge{tau_c, 1.0, sigma}, false}),
        gap_(gap),
        decay_(std::exp(-1.0 / tau_c)) {
    if (!(gap > 0.0 && gap < 1.0)) throw InvalidInput("lower_bound: gap must lie in (0, 1)");
    // Jumps from the far side shrink the distance by at least 1/2.
    if (!(tau_c >= 1.0 / std::log(2.0)))
      throw InvalidInput("lower_bound: tau_c must be >= 1/ln 2");
  }

  double gap() const { return gap_; }

  StateVector initial_state() const override { return {0.0}; }

  StateVector sample_state(Rng& rng) const override { return {uniform(rng, kZ1, kZ2)}; }

 protected:
  StateVector evolve_unchecked(ActionId a, const StateVector& z) const override {
    const double v = z[0];
    if (a.value == 1) return {v > 0.0 ? -1.0 : (1.0 - decay_) * kZ1 + decay_ * v};
    return {v < 0.0 ? 1.0 : (1.0 - decay_) * kZ2 + decay_ * v};
  }

  double reward_unchecked(ActionId a, const StateVector& z) const override {
    if (a.value == 1) return 0.0;
    return z[0] < kZ2 - gap_ ? 0.0 : gap_ + z[0] - kZ2;
  }

 private:
  double gap_;
  double decay_;
};

inline UcbBreakerEnv build_ucb_breaker() { return UcbBreakerEnv{}; }

inline LowerBoundPairEnv build_lower_bound_pair(double gap, double tau_c) {
  return LowerBoundPairEnv{gap, tau_c};
}

}  // namespace eqbandit

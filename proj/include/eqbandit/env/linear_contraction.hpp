#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "eqbandit/core.hpp"

namespace eqbandit {

/// One arm of the scalar toy: z <- z* + c (z - z*), reward x* + slope (z - z*).
struct LinearArm {
  double z_star = 0.0;
  double contraction = 0.5;
  double x_star = 0.5;
  double slope = 1.0;
};

/// Scalar geometric-contraction instance on the feasible interval [-0.5, 0.5].
class LinearContractionEnv final : public EnvironmentModel {
 public:
  static constexpr double kLower = -0.5;
  static constexpr double kUpper = 0.5;

  /// Knowledge defaults to tau_c = -1/log(max c) (at least 1) and L = max |slope|.
  LinearContractionEnv(std::vector<LinearArm> arms, double initial_state, double sigma)
      : LinearContractionEnv(arms, initial_state, sigma, default_knowledge(arms, sigma)) {}

  LinearContractionEnv(std::vector<LinearArm> arms, double initial_state, double sigma,
                       ConvergenceKnowledge knowledge)
      : EnvironmentModel(EnvironmentTraits{"linear", static_cast<int>(arms.size()), 1, sigma,
                                           Norm::kAbs, knowledge, false}),
        arms_(std::move(arms)),
        initial_(initial_state) {
    for (const auto& a : arms_) {
      if (!(a.contraction >= 0.0 && a.contraction < 1.0))
        throw InvalidInput("linear arm contraction must lie in [0, 1)");
      if (a.z_star < kLower || a.z_star > kUpper)
        throw InvalidInput("linear arm fixed point outside [-0.5, 0.5]");
    }
    if (initial_ < kLower || initial_ > kUpper)
      throw InvalidInput("linear initial state outside [-0.5, 0.5]");
    traits_.knowledge.validate();
  }

  static ConvergenceKnowledge default_knowledge(const std::vector<LinearArm>& arms, double sigma) {
    double c = 0.0, l = 0.0;
    for (const auto& a : arms) {
      c = std::max(c, a.contraction);
      l = std::max(l, std::abs(a.slope));
    }
    const double tau = c > 0.0 ? std::max(1.0, -1.0 / std::log(c)) : 1.0;
    return ConvergenceKnowledge{tau, l > 0.0 ? l : 1.0, sigma};
  }

  const std::vector<LinearArm>& arms() const { return arms_; }

  StateVector initial_state() const override { return {initial_}; }

  StateVector sample_state(Rng& rng) const override { return {uniform(rng, kLower, kUpper)}; }

 protected:
  StateVector evolve_unchecked(ActionId a, const StateVector& z) const override {
    const auto& arm = arms_[a.index()];
    return {arm.z_star + arm.contraction * (z[0] - arm.z_star)};
  }

  double reward_unchecked(ActionId a, const StateVector& z) const override {
    const auto& arm = arms_[a.index()];
    return arm.x_star + arm.slope * (z[0] - arm.z_star);
  }

 private:
  std::vector<LinearArm> arms_;
  double initial_;
};

}  // namespace eqbandit

#pragma once

// Equilibrium-bandit model: a controlled system whose state converges to an
// action-dependent fixed point, a reward read off (action, state), additive
// Gaussian observation noise, the equilibrium oracle and regret bookkeeping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "eqbandit/errors.hpp"
#include "eqbandit/rng.hpp"

namespace eqbandit {

using StateVector = std::vector<double>;

/// 1-based action identifier in {1..K}.
struct ActionId {
  int value = 1;

  constexpr ActionId() = default;
  constexpr explicit ActionId(int v) : value(v) {}

  /// 0-based position for indexing per-arm arrays.
  constexpr std::size_t index() const { return static_cast<std::size_t>(value - 1); }
  static constexpr ActionId from_index(std::size_t i) { return ActionId(static_cast<int>(i) + 1); }

  friend constexpr bool operator==(ActionId, ActionId) = default;
};

enum class Norm { kL1, kL2, kAbs };

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::kL1: return "l1";
    case Norm::kL2: return "l2";
    case Norm::kAbs: return "abs";
  }
  return "?";
}

inline double distance(Norm norm, const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw InvalidInput("distance: dimension mismatch");
  double acc = 0.0;
  switch (norm) {
    case Norm::kL1:
    case Norm::kAbs:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    case Norm::kL2:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(acc);
  }
  return acc;
}

/// What the agent is told about the system: convergence time, Lipschitz
/// constant of the reward and the noise level.
struct ConvergenceKnowledge {
  double tau_c = 1.0;
  double lipschitz_L = 1.0;
  double sigma = 0.0;

  void validate() const {
    if (!(tau_c >= 1.0) || !std::isfinite(tau_c))
      throw InvalidInput("ConvergenceKnowledge: tau_c must be >= 1");
    if (!(lipschitz_L > 0.0) || !std::isfinite(lipschitz_L))
      throw InvalidInput("ConvergenceKnowledge: lipschitz_L must be > 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw InvalidInput("ConvergenceKnowledge: sigma must be >= 0");
  }

  /// Contraction factor bound exp(-1/tau_c).
  double contraction_bound() const { return std::exp(-1.0 / tau_c); }
};

/// Static description shared by every environment.
struct EnvironmentTraits {
  std::string name;
  int action_count = 0;
  std::size_t state_dim = 0;
  double noise_sigma = 0.0;
  Norm norm = Norm::kAbs;
  ConvergenceKnowledge knowledge;
  /// Instances built to break baselines may leave [0,1]; they skip clamping.
  bool exempt_from_normalization = false;
};

/// Deterministic evolution g(a; z) and reward f(a; z). Implementations are
/// immutable after construction and safe to share across threads.
class EnvironmentModel {
 public:
  virtual ~EnvironmentModel() = default;

  const std::string& name() const { return traits_.name; }
  int action_count() const { return traits_.action_count; }
  std::size_t state_dim() const { return traits_.state_dim; }
  double noise_sigma() const { return traits_.noise_sigma; }
  Norm norm() const { return traits_.norm; }
  const ConvergenceKnowledge& knowledge() const { return traits_.knowledge; }
  bool exempt_from_normalization() const { return traits_.exempt_from_normalization; }

  virtual StateVector initial_state() const = 0;

  /// Uniform-ish draw from the declared feasible set Z.
  virtual StateVector sample_state(Rng& rng) const = 0;

  /// Draw used for randomized initial conditions of a realization.
  virtual StateVector sample_initial_state(Rng& rng) const { return sample_state(rng); }

  /// g(a; z).
  StateVector evolve(ActionId a, const StateVector& z) const {
    check(a, z);
    return evolve_unchecked(a, z);
  }

  /// f(a; z), clamped to [0,1] unless the instance is exempt.
  double expected_reward(ActionId a, const StateVector& z) const {
    check(a, z);
    const double r = reward_unchecked(a, z);
    if (traits_.exempt_from_normalization) return r;
    return std::clamp(r, 0.0, 1.0);
  }

  void check_action(ActionId a) const {
    if (a.value < 1 || a.value > traits_.action_count)
      throw InvalidInput("action " + std::to_string(a.value) + " outside 1.." +
                         std::to_string(traits_.action_count));
  }

  void check(ActionId a, const StateVector& z) const {
    check_action(a);
    if (z.size() != traits_.state_dim)
      throw InvalidInput("state dimension " + std::to_string(z.size()) + " != " +
                         std::to_string(traits_.state_dim));
  }

 protected:
  explicit EnvironmentModel(EnvironmentTraits traits) : traits_(std::move(traits)) {
    if (traits_.action_count < 1) throw InvalidInput("environment needs at least one action");
    if (traits_.state_dim < 1) throw InvalidInput("environment needs a nonempty state");
    if (!(traits_.noise_sigma >= 0.0)) throw InvalidInput("noise sigma must be >= 0");
  }

  virtual StateVector evolve_unchecked(ActionId a, const StateVector& z) const = 0;
  virtual double reward_unchecked(ActionId a, const StateVector& z) const = 0;

  EnvironmentTraits traits_;
};

struct StepResult {
  StateVector next_state;
  double expected_reward = 0.0;
  double noisy_reward = 0.0;
};

/// One timestep: next state, expected reward at the current state and the
/// noisy observation y = x + N(0, sigma^2). No draw is taken when sigma == 0.
inline StepResult step_environment(const EnvironmentModel& env, ActionId a, const StateVector& z,
                                   Rng& rng) {
  StepResult out;
  out.expected_reward = env.expected_reward(a, z);
  out.next_state = env.evolve(a, z);
  out.noisy_reward = out.expected_reward;
  if (env.noise_sigma() > 0.0)
    out.noisy_reward += std::normal_distribution<double>(0.0, env.noise_sigma())(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Equilibrium oracle

struct EquilibriumEntry {
  StateVector z_star;
  double x_star = 0.0;
  std::int64_t iterations = 0;
  double residual = 0.0;
};

inline constexpr double kDefaultEquilibriumTol = 1e-10;

/// ceil(10 * tau_c * log(1/tol)).
inline std::int64_t default_max_iters(double tau_c, double tol = kDefaultEquilibriumTol) {
  return static_cast<std::int64_t>(std::ceil(10.0 * tau_c * std::log(1.0 / tol)));
}

/// Iterates z <- g(a; z) from the environment's initial state until successive
/// iterates are closer than `tol` in the environment's norm.
inline EquilibriumEntry compute_equilibrium(const EnvironmentModel& env, ActionId a, double tol,
                                            std::int64_t max_iters) {
  if (!(tol > 0.0)) throw InvalidInput("compute_equilibrium: tol must be > 0");
  if (max_iters < 1) throw InvalidInput("compute_equilibrium: max_iters must be >= 1");
  env.check_action(a);
  StateVector z = env.initial_state();
  double residual = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= max_iters; ++k) {
    StateVector next = env.evolve(a, z);
    residual = distance(env.norm(), next, z);
    z = std::move(next);
    if (residual < tol) {
      EquilibriumEntry e;
      e.x_star = env.expected_reward(a, z);
      e.z_star = std::move(z);
      e.iterations = k;
      e.residual = residual;
      return e;
    }
  }
  throw ConvergenceFailure("compute_equilibrium: action " + std::to_string(a.value) +
                               " did not converge after " + std::to_string(max_iters) +
                               " iterations (last residual " + std::to_string(residual) + ")",
                           residual);
}

inline EquilibriumEntry compute_equilibrium(const EnvironmentModel& env, ActionId a) {
  return compute_equilibrium(env, a, kDefaultEquilibriumTol,
                             default_max_iters(env.knowledge().tau_c));
}

struct GapReport {
  ActionId optimal_action;
  std::vector<double> delta;
  bool tie = false;  ///< more than one action attains the maximum
};

/// Optimal action is the argmax of x_star, lowest index on ties.
inline GapReport compute_gaps(const std::vector<double>& x_star) {
  if (x_star.empty()) throw InvalidInput("compute_gaps: no actions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < x_star.size(); ++i)
    if (x_star[i] > x_star[best]) best = i;
  GapReport g;
  g.optimal_action = ActionId::from_index(best);
  g.delta.resize(x_star.size());
  int at_max = 0;
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    g.delta[i] = x_star[best] - x_star[i];
    if (x_star[i] == x_star[best]) ++at_max;
  }
  g.tie = at_max > 1;
  return g;
}

/// Per-action equilibria plus gaps, everything regret accounting needs.
struct EquilibriumInfo {
  std::vector<EquilibriumEntry> entries;
  ActionId optimal_action;
  std::vector<double> delta;
  bool tie = false;

  double optimal_reward() const { return entries.at(optimal_action.index()).x_star; }
  std::vector<double> x_star() const {
    std::vector<double> x;
    x.reserve(entries.size());
    for (const auto& e : entries) x.push_back(e.x_star);
    return x;
  }
};

inline EquilibriumInfo compute_equilibria(const EnvironmentModel& env,
                                          double tol = kDefaultEquilibriumTol,
                                          std::int64_t max_iters = -1) {
  if (max_iters < 0) max_iters = default_max_iters(env.knowledge().tau_c, tol);
  EquilibriumInfo info;
  for (int a = 1; a <= env.action_count(); ++a)
    info.entries.push_back(compute_equilibrium(env, ActionId(a), tol, max_iters));
  GapReport gaps = compute_gaps(info.x_star());
  info.optimal_action = gaps.optimal_action;
  info.delta = std::move(gaps.delta);
  info.tie = gaps.tie;
  return info;
}

// ---------------------------------------------------------------------------
// Regret bookkeeping

/// Cumulative pseudo-regret (against x_t) and realized regret (against y_t).
struct RegretTrajectory {
  std::vector<double> pseudo_regret;
  std::vector<double> realized_regret;
  std::vector<ActionId> actions;

  void reserve(std::size_t horizon) {
    pseudo_regret.reserve(horizon);
    realized_regret.reserve(horizon);
    actions.reserve(horizon);
  }
  std::size_t horizon() const { return pseudo_regret.size(); }
  double final_pseudo() const { return pseudo_regret.empty() ? 0.0 : pseudo_regret.back(); }
  double final_realized() const { return realized_regret.empty() ? 0.0 : realized_regret.back(); }
};

inline void accumulate_regret(RegretTrajectory& traj, double x_star_opt, double x_t, double y_t,
                              ActionId a_t) {
  const double prev_p = traj.pseudo_regret.empty() ? 0.0 : traj.pseudo_regret.back();
  const double prev_r = traj.realized_regret.empty() ? 0.0 : traj.realized_regret.back();
  traj.pseudo_regret.push_back(prev_p + (x_star_opt - x_t));
  traj.realized_regret.push_back(prev_r + (x_star_opt - y_t));
  traj.actions.push_back(a_t);
}

}  // namespace eqbandit

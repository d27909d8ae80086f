#pragma once

// Upper Equilibrium Confidence Bound (UECB).
//
// Plays one arm per epoch. An arm's k-th epoch lasts 2*rho2*exp(rho1*k)
// steps (rounded up to an even integer), so arms that keep looking good are
// held long enough for the system to settle near their equilibrium. The index
// of an arm is its latest reward estimate plus a bonus covering the distance
// to equilibrium and, in the noisy mode, a concentration radius.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/policy.hpp"

namespace eqbandit {

enum class UecbMode { kNoiseless, kNoisy };

struct UecbParams {
  double rho1 = std::log(2.0);
  double rho2 = 1.0;
  UecbMode mode = UecbMode::kNoisy;
  ConvergenceKnowledge knowledge;

  void validate() const {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw InvalidInput("UECB: rho1 and rho2 must be > 0");
    knowledge.validate();
  }
};

/// Per-arm bookkeeping after the last completed epoch.
struct EpochState {
  std::vector<int> epochs;                     ///< m_a: epochs played per arm
  std::vector<std::int64_t> last_epoch_len;    ///< length of each arm's last epoch
  std::vector<double> x_hat;                   ///< reward estimate per arm
  std::vector<double> index;                   ///< UECB index per arm
  std::int64_t t = 0;                          ///< timesteps in completed epochs
  std::int64_t n = 0;                          ///< completed epochs

  static EpochState initial(int arms) {
    if (arms < 1) throw InvalidInput("EpochState: need at least one arm");
    EpochState s;
    const auto k = static_cast<std::size_t>(arms);
    s.epochs.assign(k, 0);
    s.last_epoch_len.assign(k, 0);
    s.x_hat.assign(k, 0.0);
    s.index.assign(k, std::numeric_limits<double>::infinity());
    return s;
  }
  int arms() const { return static_cast<int>(epochs.size()); }
};

/// Length of an arm's next epoch given it has completed `m_prior` epochs:
/// 2*rho2*exp(rho1*(m_prior+1)) rounded up to the nearest even integer >= 2.
inline std::int64_t epoch_length(int m_prior, const UecbParams& params) {
  if (m_prior < 0) throw InvalidInput("epoch_length: m_prior must be >= 0");
  const double raw = 2.0 * params.rho2 * std::exp(params.rho1 * (m_prior + 1));
  if (!std::isfinite(raw) || raw > 4.0e18)
    throw ScheduleOverflow("epoch_length: schedule overflows at m=" + std::to_string(m_prior));
  // Absorb the last-ulp error of exp() so exact products (e.g. 2*2^k) are not
  // bumped to the next even number.
  auto len = static_cast<std::int64_t>(std::ceil(raw * (1.0 - 1e-12)));
  if (len % 2 != 0) ++len;
  return std::max<std::int64_t>(len, 2);
}

/// x_last + L*exp(-epoch_len/tau_c).
inline double noiseless_index(double x_last, std::int64_t epoch_len,
                              const ConvergenceKnowledge& k) {
  if (epoch_len < 1) throw InvalidInput("noiseless_index: epoch_len must be >= 1");
  return x_last + k.lipschitz_L * std::exp(-static_cast<double>(epoch_len) / k.tau_c);
}

/// Bound on the bias of a second-half average caused by the state not having
/// reached equilibrium: (2/l) * L*exp(-(1 + l/2)/tau_c) / (1 - exp(-1/tau_c)).
inline double equilibrium_noise_term(std::int64_t epoch_len, const ConvergenceKnowledge& k) {
  if (epoch_len < 2) throw InvalidInput("equilibrium_noise_term: epoch_len must be >= 2");
  const double l = static_cast<double>(epoch_len);
  return (2.0 / l) * k.lipschitz_L * std::exp(-(1.0 + l / 2.0) / k.tau_c) /
         (1.0 - std::exp(-1.0 / k.tau_c));
}

/// sqrt((4 sigma^2 / l) * log(2 / delta_n)).
inline double confidence_radius(std::int64_t epoch_len, double sigma, double delta_n) {
  if (epoch_len < 2) throw InvalidInput("confidence_radius: epoch_len must be >= 2");
  if (!(delta_n > 0.0) || !(delta_n < 2.0))
    throw InvalidInput("confidence_radius: delta_n must lie in (0, 2)");
  return std::sqrt(4.0 * sigma * sigma / static_cast<double>(epoch_len) * std::log(2.0 / delta_n));
}

/// delta_n = 1 / t_n^3.
inline double confidence_level(std::int64_t t) {
  const double td = static_cast<double>(t);
  return 1.0 / (td * td * td);
}

inline double noisy_index(double x_hat, std::int64_t epoch_len, const ConvergenceKnowledge& k,
                          double delta_n) {
  return x_hat + equilibrium_noise_term(epoch_len, k) +
         confidence_radius(epoch_len, k.sigma, delta_n);
}

namespace detail {

inline double second_half_mean(std::span<const double> rewards) {
  const std::size_t half = rewards.size() / 2;
  const std::size_t count = rewards.size() - half;
  double sum = 0.0;
  for (std::size_t i = half; i < rewards.size(); ++i) sum += rewards[i];
  return sum / static_cast<double>(count);
}

}  // namespace detail

/// Folds one completed epoch of `played` into the state.
///
/// Noiseless: the estimate is the last reward and only the played arm's index
/// changes. Noisy: the estimate is the mean of the epoch's second half, and
/// every played arm's index is refreshed with the new delta_n = 1/t_n^3.
inline EpochState update_after_epoch(EpochState state, ActionId played,
                                     std::span<const double> rewards, const UecbParams& params) {
  const auto a = played.index();
  if (played.value < 1 || played.value > state.arms())
    throw InvalidInput("update_after_epoch: invalid action");
  const std::int64_t expected = epoch_length(state.epochs[a], params);
  if (static_cast<std::int64_t>(rewards.size()) != expected)
    throw InvalidInput("update_after_epoch: got " + std::to_string(rewards.size()) +
                       " rewards for an epoch of length " + std::to_string(expected));

  state.epochs[a] += 1;
  state.last_epoch_len[a] = expected;
  state.t += expected;
  state.n += 1;

  if (params.mode == UecbMode::kNoiseless) {
    state.x_hat[a] = rewards.back();
    state.index[a] = noiseless_index(state.x_hat[a], expected, params.knowledge);
    return state;
  }

  state.x_hat[a] = detail::second_half_mean(rewards);
  const double delta_n = confidence_level(state.t);
  for (std::size_t b = 0; b < state.epochs.size(); ++b) {
    if (state.epochs[b] == 0) continue;  // still +inf until its first epoch
    state.index[b] = noisy_index(state.x_hat[b], state.last_epoch_len[b], params.knowledge, delta_n);
  }
  return state;
}

/// Partial final epoch cut by the horizon. Refreshes the played arm's
/// estimate and index from what was observed; the schedule counters (m, t, n)
/// only ever record completed epochs and are left untouched.
inline EpochState update_after_truncated_epoch(EpochState state, ActionId played,
                                               std::span<const double> rewards,
                                               const UecbParams& params) {
  const auto a = played.index();
  if (played.value < 1 || played.value > state.arms())
    throw InvalidInput("update_after_truncated_epoch: invalid action");
  if (params.mode == UecbMode::kNoiseless) {
    if (rewards.empty()) return state;
    state.x_hat[a] = rewards.back();
    state.index[a] = noiseless_index(state.x_hat[a], static_cast<std::int64_t>(rewards.size()),
                                     params.knowledge);
    return state;
  }
  const auto even = static_cast<std::int64_t>(rewards.size() / 2 * 2);
  if (even < 2) return state;
  state.x_hat[a] = detail::second_half_mean(rewards.last(static_cast<std::size_t>(even)));
  const double delta_n = confidence_level(state.t + static_cast<std::int64_t>(rewards.size()));
  state.index[a] = noisy_index(state.x_hat[a], even, params.knowledge, delta_n);
  return state;
}

/// Round-robin over the arms for the first K epochs, then argmax of the
/// index with ties going to the lowest action.
inline ActionId select_action(const EpochState& state, int arms) {
  if (arms != state.arms()) throw InvalidInput("select_action: arm count mismatch");
  if (state.n < arms) return ActionId(static_cast<int>(state.n) + 1);
  std::size_t best = 0;
  for (std::size_t b = 1; b < state.index.size(); ++b)
    if (state.index[b] > state.index[best]) best = b;
  return ActionId::from_index(best);
}

struct EpochThresholds {
  double ell1 = 0.0;  ///< epoch length after which the noise radius is <= gap/4
  double ell2 = 0.0;  ///< epoch length after which the equilibrium bias is <= gap/4
};

/// (64 sigma^2 / gap^2) log(2/delta_n) and 2 tau_c log_+(8L / gap).
/// Diagnostic only; the algorithm never sees the gap.
inline EpochThresholds epoch_thresholds(double gap, double delta_n,
                                          const ConvergenceKnowledge& k) {
  if (!(gap > 0.0)) throw InvalidInput("epoch_thresholds: gap must be > 0");
  if (!(delta_n > 0.0) || !(delta_n < 2.0))
    throw InvalidInput("epoch_thresholds: delta_n must lie in (0, 2)");
  EpochThresholds out;
  out.ell1 = 64.0 * k.sigma * k.sigma / (gap * gap) * std::log(2.0 / delta_n);
  out.ell2 = 2.0 * k.tau_c * std::log(std::max(8.0 * k.lipschitz_L / gap, 1.0));
  return out;
}

/// UECB as a step-by-step Policy.
class UecbPolicy final : public Policy {
 public:
  UecbPolicy(int arms, UecbParams params)
      : params_(std::move(params)), state_(EpochState::initial(arms)) {
    params_.validate();
  }

  std::string name() const override {
    return params_.mode == UecbMode::kNoisy ? "uecb" : "uecb_noiseless";
  }

  ActionId select() override {
    if (!current_) {
      current_ = select_action(state_, state_.arms());
      planned_ = epoch_length(state_.epochs[current_->index()], params_);
      rewards_.clear();
      rewards_.reserve(static_cast<std::size_t>(std::min<std::int64_t>(planned_, 1 << 20)));
    }
    return *current_;
  }

  void observe(ActionId played, double reward) override {
    if (!current_ || played != *current_)
      throw InvalidInput("UecbPolicy: observed an action that was not selected");
    rewards_.push_back(reward);
    if (static_cast<std::int64_t>(rewards_.size()) == planned_) {
      state_ = update_after_epoch(std::move(state_), *current_, rewards_, params_);
      epoch_log_.emplace_back(*current_, planned_);
      current_.reset();
    }
  }

  void finish() override {
    if (current_ && !rewards_.empty())
      state_ = update_after_truncated_epoch(std::move(state_), *current_, rewards_, params_);
    current_.reset();
    rewards_.clear();
  }

  const EpochState& state() const { return state_; }
  const UecbParams& params() const { return params_; }
  /// (action, length) of every completed epoch, in order.
  const std::vector<std::pair<ActionId, std::int64_t>>& epoch_log() const { return epoch_log_; }

 private:
  UecbParams params_;
  EpochState state_;
  std::optional<ActionId> current_;
  std::int64_t planned_ = 0;
  std::vector<double> rewards_;
  std::vector<std::pair<ActionId, std::int64_t>> epoch_log_;
};

}  // namespace eqbandit

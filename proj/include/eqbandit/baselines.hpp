#pragma once

// Reference policies that ignore the converging nature of the rewards:
// try-then-commit, UCB1, EXP3 and restarting EXP3.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/policy.hpp"
#include "eqbandit/rng.hpp"

namespace eqbandit {

// ---------------------------------------------------------------------------
// Try-then-commit

struct NaiveParams {
  std::int64_t t_try = 1;
};

/// Arm for step t (1-based): ceil(t / t_try) while exploring, then the
/// committed arm.
inline ActionId naive_select(std::int64_t t, int arms, const NaiveParams& params,
                             std::optional<ActionId> committed) {
  if (t < 1) throw InvalidInput("naive_select: t must be >= 1");
  if (params.t_try < 1) throw InvalidInput("naive_select: t_try must be >= 1");
  if (t <= arms * params.t_try)
    return ActionId(static_cast<int>((t + params.t_try - 1) / params.t_try));
  if (!committed) throw InvalidInput("naive_select: exploration finished without a commitment");
  return *committed;
}

/// Argmax of the final exploration reward of each arm, lowest index on ties.
inline ActionId naive_commit(std::span<const double> final_rewards) {
  if (final_rewards.empty()) throw InvalidInput("naive_commit: no arms");
  std::size_t best = 0;
  for (std::size_t i = 1; i < final_rewards.size(); ++i)
    if (final_rewards[i] > final_rewards[best]) best = i;
  return ActionId::from_index(best);
}

class NaivePolicy final : public Policy {
 public:
  NaivePolicy(int arms, NaiveParams params)
      : arms_(arms), params_(params), last_(static_cast<std::size_t>(arms), 0.0) {
    if (arms < 1) throw InvalidInput("NaivePolicy: need at least one arm");
    if (params.t_try < 1) throw InvalidInput("NaivePolicy: t_try must be >= 1");
  }

  std::string name() const override { return "naive"; }

  ActionId select() override { return naive_select(t_ + 1, arms_, params_, committed_); }

  void observe(ActionId played, double reward) override {
    ++t_;
    if (t_ > arms_ * params_.t_try) return;
    if (t_ % params_.t_try == 0) last_[played.index()] = reward;
    if (t_ == arms_ * params_.t_try) committed_ = naive_commit(last_);
  }

  std::optional<ActionId> committed() const { return committed_; }

 private:
  int arms_;
  NaiveParams params_;
  std::vector<double> last_;
  std::int64_t t_ = 0;
  std::optional<ActionId> committed_;
};

// ---------------------------------------------------------------------------
// UCB1

/// Unplayed arms first, otherwise argmax of mean + sqrt(2 sigma^2 log t / n).
/// sigma == 0 falls back to 1/2 so exploration stays active.
inline ActionId ucb_select(std::span<const std::int64_t> counts, std::span<const double> means,
                           std::int64_t t, double sigma) {
  if (t < 1) throw InvalidInput("ucb_select: t must be >= 1");
  if (counts.size() != means.size() || counts.empty())
    throw InvalidInput("ucb_select: counts/means size mismatch");
  for (std::size_t a = 0; a < counts.size(); ++a)
    if (counts[a] == 0) return ActionId::from_index(a);
  const double s = sigma > 0.0 ? sigma : 0.5;
  const double log_t = std::log(static_cast<double>(t));
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const double v = means[a] + std::sqrt(2.0 * s * s * log_t / static_cast<double>(counts[a]));
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return ActionId::from_index(best);
}

class UcbPolicy final : public Policy {
 public:
  UcbPolicy(int arms, double sigma)
      : sigma_(sigma),
        counts_(static_cast<std::size_t>(arms), 0),
        means_(static_cast<std::size_t>(arms), 0.0) {
    if (arms < 1) throw InvalidInput("UcbPolicy: need at least one arm");
  }

  std::string name() const override { return "ucb"; }

  ActionId select() override { return ucb_select(counts_, means_, t_ + 1, sigma_); }

  void observe(ActionId played, double reward) override {
    ++t_;
    const auto a = played.index();
    counts_[a] += 1;
    means_[a] += (reward - means_[a]) / static_cast<double>(counts_[a]);
  }

 private:
  double sigma_;
  std::vector<std::int64_t> counts_;
  std::vector<double> means_;
  std::int64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// EXP3 / REXP3

struct Exp3Params {
  double learning_rate = 0.1;
  std::optional<std::int64_t> restart_window;  ///< set for REXP3

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw InvalidInput("Exp3Params: learning_rate must be > 0");
    if (restart_window && *restart_window < 1)
      throw InvalidInput("Exp3Params: restart_window must be >= 1");
  }
};

/// sqrt(2 log K / (K T)).
inline double default_exp3_rate(int arms, std::int64_t horizon) {
  const double k = std::max(arms, 2);
  return std::sqrt(2.0 * std::log(k) / (k * static_cast<double>(std::max<std::int64_t>(horizon, 1))));
}

/// round(T^(2/3)).
inline std::int64_t default_restart_window(std::int64_t horizon) {
  return std::max<std::int64_t>(
      1, std::llround(std::pow(static_cast<double>(horizon), 2.0 / 3.0)));
}

inline std::vector<double> exp3_probabilities(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) p[i] = weights[i] / total;
  return p;
}

/// Importance-weighted exponential update of the played arm. Once the
/// largest weight passes 1e100 all weights are divided by it, which leaves
/// the distribution unchanged.
inline std::vector<double> exp3_update(std::vector<double> weights, ActionId played, double reward,
                                       std::span<const double> probs, const Exp3Params& params) {
  const auto a = played.index();
  if (a >= weights.size() || probs.size() != weights.size())
    throw InvalidInput("exp3_update: size mismatch");
  if (!(probs[a] > 0.0)) throw InvalidInput("exp3_update: played arm has zero probability");
  const double r = std::clamp(reward, 0.0, 1.0);
  const double k = static_cast<double>(weights.size());
  weights[a] *= std::exp(params.learning_rate * r / probs[a] / k);
  const double top = *std::max_element(weights.begin(), weights.end());
  if (top > 1e100) {
    for (double& w : weights) w = std::max(w / top, 1e-300);
  }
  return weights;
}

class Exp3Policy final : public Policy {
 public:
  Exp3Policy(int arms, Exp3Params params, Rng rng)
      : params_(params), weights_(static_cast<std::size_t>(arms), 1.0), rng_(rng) {
    if (arms < 1) throw InvalidInput("Exp3Policy: need at least one arm");
    params_.validate();
  }

  std::string name() const override { return params_.restart_window ? "rexp3" : "exp3"; }

  ActionId select() override {
    if (params_.restart_window && t_ % *params_.restart_window == 0)
      std::fill(weights_.begin(), weights_.end(), 1.0);
    probs_ = exp3_probabilities(weights_);
    std::discrete_distribution<std::size_t> pick(probs_.begin(), probs_.end());
    return ActionId::from_index(pick(rng_));
  }

  void observe(ActionId played, double reward) override {
    ++t_;
    weights_ = exp3_update(std::move(weights_), played, reward, probs_, params_);
  }

  const std::vector<double>& weights() const { return weights_; }
  /// Distribution used for the most recent select().
  const std::vector<double>& last_probabilities() const { return probs_; }

 private:
  Exp3Params params_;
  std::vector<double> weights_;
  std::vector<double> probs_;
  Rng rng_;
  std::int64_t t_ = 0;
};

}  // namespace eqbandit

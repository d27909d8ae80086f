#pragma once

// Resource-allocation game under gradient play. Player i spends z_i^l on
// resource l, with utility
//   u_i = sum_l gamma_il log(1 + z_i^l) - zeta_il z_i^l s_l,   s_l = sum_i z_i^l,
// and every player takes a projected gradient step of size alpha at once.
// The agent's action decides which resources each player may use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/rng.hpp"

namespace eqbandit {

struct GameConfig {
  std::size_t players = 1;
  std::size_t resources = 1;
  std::vector<double> value;   ///< gamma_il, row-major players x resources
  std::vector<double> price;   ///< zeta_il, row-major players x resources
  /// masks[a][i*resources + l] is true when player i may use resource l.
  std::vector<std::vector<bool>> masks;
  double z_max = 10.0;
  double alpha = 0.0;          ///< step size; 0 selects min_a lambda_a / beta_a^2
  double sigma = 0.0;
  /// Agent-side reward Lipschitz bound; 0 selects a heuristic default.
  double lipschitz = 0.0;
  double init_upper = 0.0;     ///< randomized starts ~ U[0, init_upper]; 0 = 2 * max Nash entry

  int actions() const { return static_cast<int>(masks.size()); }
  std::size_t dim() const { return players * resources; }
  std::size_t at(std::size_t i, std::size_t l) const { return i * resources + l; }
};

/// Strong-monotonicity and gradient-Lipschitz bounds of the stacked gradient
/// map for one action, valid on the whole box [0, z_max].
struct MonotoneBounds {
  double lambda = 0.0;
  double beta = 0.0;
};

/// Per resource the Jacobian of H on the active players is -D - zeta 1^T with
/// D = diag(gamma/(1+z)^2 + zeta). Its symmetric part is bounded below by
/// min D + lambda_min(sym(zeta 1^T)); its norm by max D + |zeta|_2 sqrt(n).
inline MonotoneBounds game_monotone_bounds(const GameConfig& cfg, ActionId a) {
  const auto& mask = cfg.masks.at(a.index());
  MonotoneBounds b{std::numeric_limits<double>::infinity(), 0.0};
  bool any = false;
  for (std::size_t l = 0; l < cfg.resources; ++l) {
    double n = 0.0, sum = 0.0, sum_sq = 0.0;
    double d_min = std::numeric_limits<double>::infinity(), d_max = 0.0;
    for (std::size_t i = 0; i < cfg.players; ++i) {
      if (!mask[cfg.at(i, l)]) continue;
      const double g = cfg.value[cfg.at(i, l)], z = cfg.price[cfg.at(i, l)];
      n += 1.0;
      sum += z;
      sum_sq += z * z;
      d_min = std::min(d_min, g / ((1.0 + cfg.z_max) * (1.0 + cfg.z_max)) + z);
      d_max = std::max(d_max, g + z);
    }
    if (n == 0.0) continue;
    any = true;
    const double sym_min = n == 1.0 ? sum : 0.5 * (sum - std::sqrt(n * sum_sq));
    b.lambda = std::min(b.lambda, d_min + sym_min);
    b.beta = std::max(b.beta, d_max + std::sqrt(sum_sq) * std::sqrt(n));
  }
  if (!any) throw InvalidInput("game: action " + std::to_string(a.value) + " masks every resource");
  if (!(b.lambda > 0.0))
    throw InvalidInput("game: action " + std::to_string(a.value) + " is not strongly monotone");
  return b;
}

/// sqrt(1 - 2 lambda alpha + alpha^2 beta^2), defined for alpha <= 2 lambda / beta^2.
inline double game_contraction_factor(double lambda, double beta, double alpha) {
  if (!(alpha > 0.0) || alpha > 2.0 * lambda / (beta * beta) * (1.0 + 1e-12))
    throw InvalidInput("game: step size outside (0, 2 lambda / beta^2]");
  return std::sqrt(std::max(0.0, 1.0 - 2.0 * lambda * alpha + alpha * alpha * beta * beta));
}

inline double game_contraction_factor(const GameConfig& cfg, ActionId a) {
  const MonotoneBounds b = game_monotone_bounds(cfg, a);
  return game_contraction_factor(b.lambda, b.beta, cfg.alpha);
}

/// Aggregate loads s_l over the players allowed on l under action a.
inline std::vector<double> game_loads(const GameConfig& cfg, ActionId a, const StateVector& z) {
  const auto& mask = cfg.masks.at(a.index());
  std::vector<double> s(cfg.resources, 0.0);
  for (std::size_t i = 0; i < cfg.players; ++i)
    for (std::size_t l = 0; l < cfg.resources; ++l)
      if (mask[cfg.at(i, l)]) s[l] += z[cfg.at(i, l)];
  return s;
}

/// Stacked gradient H(a; z); zero on masked coordinates. The derivative of
/// the price term includes z_i^l's own share of s_l.
inline std::vector<double> game_gradient(const GameConfig& cfg, ActionId a, const StateVector& z) {
  const auto& mask = cfg.masks.at(a.index());
  const std::vector<double> s = game_loads(cfg, a, z);
  std::vector<double> h(cfg.dim(), 0.0);
  for (std::size_t i = 0; i < cfg.players; ++i)
    for (std::size_t l = 0; l < cfg.resources; ++l) {
      const std::size_t k = cfg.at(i, l);
      if (!mask[k]) continue;
      h[k] = cfg.value[k] / (1.0 + z[k]) - cfg.price[k] * (s[l] + z[k]);
    }
  return h;
}

/// Simultaneous projected gradient step; masked coordinates are set to 0.
inline StateVector game_step(const GameConfig& cfg, ActionId a, const StateVector& z) {
  if (z.size() != cfg.dim()) throw InvalidInput("game_step: dimension mismatch");
  const auto& mask = cfg.masks.at(a.index());
  const std::vector<double> h = game_gradient(cfg, a, z);
  StateVector next(z.size(), 0.0);
  for (std::size_t k = 0; k < z.size(); ++k)
    if (mask[k]) next[k] = std::clamp(z[k] + cfg.alpha * h[k], 0.0, cfg.z_max);
  return next;
}

/// Sum of utilities on the effective (mask-respecting) profile.
inline double game_welfare(const GameConfig& cfg, ActionId a, const StateVector& z) {
  const auto& mask = cfg.masks.at(a.index());
  const std::vector<double> s = game_loads(cfg, a, z);
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.players; ++i)
    for (std::size_t l = 0; l < cfg.resources; ++l) {
      const std::size_t k = cfg.at(i, l);
      if (!mask[k]) continue;
      total += cfg.value[k] * std::log1p(z[k]) - cfg.price[k] * z[k] * s[l];
    }
  return total;
}

/// Nash equilibrium by a route independent of gradient play: for a fixed
/// total load s each active player's best response solves
/// zeta (s + z)(1 + z) = gamma (clipped to [0, z_max]), and s is the unique
/// root of s = sum_i z_i(s), found by bisection.
inline StateVector game_nash(const GameConfig& cfg, ActionId a) {
  const auto& mask = cfg.masks.at(a.index());
  StateVector z(cfg.dim(), 0.0);
  auto response = [&](std::size_t k, double s) {
    const double g = cfg.value[k], p = cfg.price[k];
    const double root = 0.5 * (-(1.0 + s) + std::sqrt((1.0 - s) * (1.0 - s) + 4.0 * g / p));
    return std::clamp(root, 0.0, cfg.z_max);
  };
  for (std::size_t l = 0; l < cfg.resources; ++l) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < cfg.players; ++i)
      if (mask[cfg.at(i, l)]) active.push_back(cfg.at(i, l));
    if (active.empty()) continue;
    auto excess = [&](double s) {
      double sum = 0.0;
      for (auto k : active) sum += response(k, s);
      return s - sum;
    };
    double lo = 0.0, hi = static_cast<double>(active.size()) * cfg.z_max;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    for (auto k : active) z[k] = response(k, s);
  }
  return z;
}

/// Empirical counterparts of the monotonicity bounds from random state pairs:
/// min of -<dz, dH>/|dz|^2 and max of |dH|/|dz|. The analytic bounds must
/// bracket them.
inline MonotoneBounds game_sampled_bounds(const GameConfig& cfg, ActionId a, Rng& rng, int pairs) {
  const auto& mask = cfg.masks.at(a.index());
  MonotoneBounds out{std::numeric_limits<double>::infinity(), 0.0};
  for (int p = 0; p < pairs; ++p) {
    StateVector x(cfg.dim(), 0.0), y(cfg.dim(), 0.0);
    for (std::size_t k = 0; k < cfg.dim(); ++k)
      if (mask[k]) {
        x[k] = uniform(rng, 0.0, cfg.z_max);
        y[k] = uniform(rng, 0.0, cfg.z_max);
      }
    const auto hx = game_gradient(cfg, a, x), hy = game_gradient(cfg, a, y);
    double dot = 0.0, dz2 = 0.0, dh2 = 0.0;
    for (std::size_t k = 0; k < cfg.dim(); ++k) {
      dot += (x[k] - y[k]) * (hx[k] - hy[k]);
      dz2 += (x[k] - y[k]) * (x[k] - y[k]);
      dh2 += (hx[k] - hy[k]) * (hx[k] - hy[k]);
    }
    if (dz2 == 0.0) continue;
    out.lambda = std::min(out.lambda, -dot / dz2);
    out.beta = std::max(out.beta, std::sqrt(dh2 / dz2));
  }
  return out;
}

class GameEnv final : public EnvironmentModel {
 public:
  explicit GameEnv(GameConfig cfg)
      : EnvironmentModel(EnvironmentTraits{"game", cfg.actions(), cfg.dim(), cfg.sigma, Norm::kL2,
                                           ConvergenceKnowledge{}, false}),
        cfg_(std::move(cfg)) {
    validate();
    bounds_.reserve(static_cast<std::size_t>(cfg_.actions()));
    double alpha_max = std::numeric_limits<double>::infinity();
    double alpha_default = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= cfg_.actions(); ++a) {
      bounds_.push_back(game_monotone_bounds(cfg_, ActionId(a)));
      const auto& b = bounds_.back();
      alpha_default = std::min(alpha_default, b.lambda / (b.beta * b.beta));
      alpha_max = std::min(alpha_max, 2.0 * b.lambda / (b.beta * b.beta));
    }
    if (cfg_.alpha == 0.0) cfg_.alpha = alpha_default;
    if (!(cfg_.alpha > 0.0) || cfg_.alpha > alpha_max * (1.0 + 1e-12))
      throw InvalidInput("game: step size must lie in (0, min_a 2 lambda_a / beta_a^2]");

    double worst = 0.0;
    for (int a = 1; a <= cfg_.actions(); ++a) {
      const auto& b = bounds_[static_cast<std::size_t>(a - 1)];
      worst = std::max(worst, game_contraction_factor(b.lambda, b.beta, cfg_.alpha));
    }
    if (!(worst < 1.0)) throw InvalidInput("game: gradient play does not contract for some action");

    for (int a = 1; a <= cfg_.actions(); ++a) nash_.push_back(game_nash(cfg_, ActionId(a)));
    calibrate_reward();
    if (cfg_.init_upper == 0.0) {
      double top = 0.0;
      for (const auto& z : nash_)
        for (double x : z) top = std::max(top, x);
      cfg_.init_upper = std::min(cfg_.z_max, std::max(2.0 * top, 1e-3));
    }

    traits_.knowledge.tau_c = worst > 0.0 ? std::max(1.0, -1.0 / std::log(worst)) : 1.0;
    traits_.knowledge.lipschitz_L = cfg_.lipschitz > 0.0 ? cfg_.lipschitz : heuristic_lipschitz();
    traits_.knowledge.sigma = cfg_.sigma;
    traits_.knowledge.validate();
  }

  const GameConfig& config() const { return cfg_; }
  const MonotoneBounds& bounds(ActionId a) const { return bounds_.at(a.index()); }
  const StateVector& nash(ActionId a) const { return nash_.at(a.index()); }
  double contraction_factor(ActionId a) const {
    const auto& b = bounds(a);
    return game_contraction_factor(b.lambda, b.beta, cfg_.alpha);
  }
  /// Affine map welfare -> reward: (welfare - offset) / scale, then clamped.
  double welfare_offset() const { return offset_; }
  double welfare_scale() const { return scale_; }

  StateVector initial_state() const override { return StateVector(cfg_.dim(), 0.0); }

  StateVector sample_state(Rng& rng) const override {
    StateVector z(cfg_.dim());
    for (auto& x : z) x = uniform(rng, 0.0, cfg_.z_max);
    return z;
  }

  StateVector sample_initial_state(Rng& rng) const override {
    StateVector z(cfg_.dim());
    for (auto& x : z) x = uniform(rng, 0.0, cfg_.init_upper);
    return z;
  }

 protected:
  StateVector evolve_unchecked(ActionId a, const StateVector& z) const override {
    return game_step(cfg_, a, z);
  }

  double reward_unchecked(ActionId a, const StateVector& z) const override {
    return (game_welfare(cfg_, a, z) - offset_) / scale_;
  }

 private:
  void validate() const {
    const std::size_t n = cfg_.dim();
    if (cfg_.players < 1 || cfg_.resources < 1) throw InvalidInput("game: empty game");
    if (cfg_.value.size() != n || cfg_.price.size() != n)
      throw InvalidInput("game: coefficient arrays must have players*resources entries");
    if (cfg_.masks.empty()) throw InvalidInput("game: need at least one action");
    for (const auto& m : cfg_.masks)
      if (m.size() != n) throw InvalidInput("game: mask size != players*resources");
    for (std::size_t k = 0; k < n; ++k)
      if (!(cfg_.value[k] > 0.0) || !(cfg_.price[k] > 0.0))
        throw InvalidInput("game: coefficients must be > 0");
    if (!(cfg_.z_max > 0.0)) throw InvalidInput("game: z_max must be > 0");
    if (!(cfg_.alpha >= 0.0)) throw InvalidInput("game: alpha must be >= 0");
  }

  // Rewards are pinned so the equilibrium welfares and the welfare at the
  // initial profile land inside [0,1] with a quarter-range margin each side.
  void calibrate_reward() {
    double lo = game_welfare(cfg_, ActionId(1), initial_state());
    double hi = lo;
    for (int a = 1; a <= cfg_.actions(); ++a) {
      const double w = game_welfare(cfg_, ActionId(a), nash_[static_cast<std::size_t>(a - 1)]);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    const double pad = 0.25 * (hi - lo) + 1e-9;
    offset_ = lo - pad;
    scale_ = (hi + pad) - offset_;
  }

  // Welfare gradient norm at the reference profiles, scaled to reward units
  // and multiplied by their spread, doubled.
  double heuristic_lipschitz() const {
    std::vector<StateVector> pts = nash_;
    pts.push_back(initial_state());
    double grad = 0.0;
    for (int a = 1; a <= cfg_.actions(); ++a)
      for (const auto& z : pts) {
        const auto& mask = cfg_.masks[static_cast<std::size_t>(a - 1)];
        const auto s = game_loads(cfg_, ActionId(a), z);
        std::vector<double> weighted(cfg_.resources, 0.0);
        for (std::size_t i = 0; i < cfg_.players; ++i)
          for (std::size_t l = 0; l < cfg_.resources; ++l)
            if (mask[cfg_.at(i, l)]) weighted[l] += cfg_.price[cfg_.at(i, l)] * z[cfg_.at(i, l)];
        double g2 = 0.0;
        for (std::size_t i = 0; i < cfg_.players; ++i)
          for (std::size_t l = 0; l < cfg_.resources; ++l) {
            const std::size_t k = cfg_.at(i, l);
            if (!mask[k]) continue;
            const double d = cfg_.value[k] / (1.0 + z[k]) - cfg_.price[k] * s[l] - weighted[l];
            g2 += d * d;
          }
        grad = std::max(grad, std::sqrt(g2));
      }
    double spread = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (std::size_t q = p + 1; q < pts.size(); ++q)
        spread = std::max(spread, distance(Norm::kL2, pts[p], pts[q]));
    const double l = 2.0 * grad * spread / scale_;
    return l > 0.0 ? l : 1.0;
  }

  GameConfig cfg_;
  std::vector<MonotoneBounds> bounds_;
  std::vector<StateVector> nash_;
  double offset_ = 0.0;
  double scale_ = 1.0;
};

struct NetworkGameOptions {
  std::size_t players = 1000;
  std::size_t resources = 10;
  int actions = 4;
  double coefficient_lo = 0.8;
  double coefficient_hi = 1.0;
  double access_probability = 0.5;
  double z_max = 10.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double lipschitz = 0.0;
};

/// Random resource-allocation game: coefficients uniform in [0.8, 1] and, per
/// action, a random subset of resources for every player (never empty).
inline GameConfig make_network_game_config(std::uint64_t seed, const NetworkGameOptions& opt = {}) {
  GameConfig cfg;
  cfg.players = opt.players;
  cfg.resources = opt.resources;
  cfg.z_max = opt.z_max;
  cfg.alpha = opt.alpha;
  cfg.sigma = opt.sigma;
  cfg.lipschitz = opt.lipschitz;
  Rng rng = make_rng(seed, 0, Stream::kConstruction);
  const std::size_t n = cfg.dim();
  cfg.value.resize(n);
  cfg.price.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cfg.value[k] = uniform(rng, opt.coefficient_lo, opt.coefficient_hi);
    cfg.price[k] = uniform(rng, opt.coefficient_lo, opt.coefficient_hi);
  }
  for (int a = 0; a < opt.actions; ++a) {
    std::vector<bool> mask(n, false);
    for (std::size_t i = 0; i < cfg.players; ++i) {
      bool any = false;
      for (std::size_t l = 0; l < cfg.resources; ++l) {
        const bool on = uniform01(rng) < opt.access_probability;
        mask[cfg.at(i, l)] = on;
        any = any || on;
      }
      if (!any) {
        const auto l = std::uniform_int_distribution<std::size_t>(0, cfg.resources - 1)(rng);
        mask[cfg.at(i, l)] = true;
      }
    }
    cfg.masks.push_back(std::move(mask));
  }
  return cfg;
}

inline GameEnv build_network_game(std::uint64_t seed, const NetworkGameOptions& opt = {}) {
  return GameEnv(make_network_game_config(seed, opt));
}

}  // namespace eqbandit

#pragma once

// Networked SIS epidemic. One outer step of the bandit clock is ceil(1/dt)
// explicit Euler steps of
//   I <- I + (beta_a (1 - diag(I)) A_a I - gamma I) dt,
// and the agent pays an operational cost plus a weighted infection cost.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/env/matrix.hpp"
#include "eqbandit/rng.hpp"

namespace eqbandit {

struct SisConfig {
  std::size_t nodes = 1;
  std::vector<SquareMatrix> adjacency;     ///< per action, symmetric, >= 0
  std::vector<double> beta;                ///< per action infection rate
  double gamma = 0.01;                     ///< recovery rate
  double dt = 0.1;
  std::vector<double> w0;                  ///< per action operational cost in (0,1]
  std::vector<std::vector<double>> w;      ///< per action health cost in (0,1]^M
  /// Agent-side lower bound on beta_a (A_a I)_i; the outer-step contraction is
  /// roughly exp(-alpha), so the agent uses tau_c = 1/alpha.
  double alpha_lb = 0.0035;
  double lipschitz = 1.0;                  ///< agent-side reward Lipschitz bound
  double sigma = 0.0;
  double feasible_lower = 0.1;             ///< Z = [feasible_lower, 1]^M
  double init_lower = 0.1;                 ///< randomized starts ~ U[init_lower, init_upper]^M
  double init_upper = 0.2;

  int actions() const { return static_cast<int>(beta.size()); }
  int inner_steps() const { return static_cast<int>(std::ceil(1.0 / dt - 1e-9)); }
};

inline void validate_sis_config(const SisConfig& cfg) {
  const std::size_t k = cfg.beta.size();
  if (k == 0) throw InvalidInput("sis: need at least one action");
  if (cfg.adjacency.size() != k || cfg.w0.size() != k || cfg.w.size() != k)
    throw InvalidInput("sis: per-action arrays disagree in length");
  if (!(cfg.gamma > 0.0)) throw InvalidInput("sis: gamma must be > 0");
  if (!(cfg.dt > 0.0 && cfg.dt < 1.0)) throw InvalidInput("sis: dt must lie in (0, 1)");
  if (!(cfg.alpha_lb > 0.0)) throw InvalidInput("sis: alpha must be > 0");
  if (!(cfg.feasible_lower > 0.0 && cfg.feasible_lower < 1.0))
    throw InvalidInput("sis: feasible lower bound must lie in (0, 1)");
  if (!(cfg.init_lower >= cfg.feasible_lower && cfg.init_lower <= cfg.init_upper &&
        cfg.init_upper <= 1.0))
    throw InvalidInput("sis: initial range must satisfy feasible_lower <= lower <= upper <= 1");
  for (std::size_t a = 0; a < k; ++a) {
    const auto& m = cfg.adjacency[a];
    if (m.n != cfg.nodes) throw InvalidInput("sis: adjacency size != nodes");
    if (!m.is_symmetric(1e-12)) throw InvalidInput("sis: adjacency must be symmetric");
    for (double x : m.data)
      if (!(x >= 0.0)) throw InvalidInput("sis: adjacency entries must be >= 0");
    if (!(cfg.beta[a] > 0.0)) throw InvalidInput("sis: beta must be > 0");
    if (!(cfg.w0[a] > 0.0 && cfg.w0[a] <= 1.0)) throw InvalidInput("sis: w0 must lie in (0, 1]");
    if (cfg.w[a].size() != cfg.nodes) throw InvalidInput("sis: w size != nodes");
    for (double x : cfg.w[a])
      if (!(x > 0.0 && x <= 1.0)) throw InvalidInput("sis: w entries must lie in (0, 1]");
    // Below the epidemic threshold the only equilibrium is I = 0.
    const double lmax = perron_root(m);
    if (!(cfg.beta[a] * lmax > cfg.gamma))
      throw InvalidInput("sis: action " + std::to_string(a + 1) +
                         " has beta*lambda_max <= gamma (no endemic equilibrium)");
  }
}

/// Number of clamps to [0,1] that sis_step had to apply since start-up.
inline std::atomic<std::uint64_t>& sis_clamp_events() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

namespace detail {

inline void sis_euler_step(const SisConfig& cfg, std::size_t a, std::vector<double>& state,
                           std::vector<double>& scratch) {
  const double beta = cfg.beta[a];
  const double dt = cfg.dt;
  cfg.adjacency[a].multiply(state.data(), scratch.data());
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!(1.0 - beta * dt * scratch[i] > 0.0))
      throw DynamicsInstability("sis: Euler factor 1 - beta dt (A I)_i left (0, 1); reduce dt");
    double next = state[i] + (beta * (1.0 - state[i]) * scratch[i] - cfg.gamma * state[i]) * dt;
    if (next < 0.0 || next > 1.0) {
      sis_clamp_events().fetch_add(1, std::memory_order_relaxed);
      next = std::clamp(next, 0.0, 1.0);
    }
    state[i] = next;
  }
}

}  // namespace detail

/// One Euler step of size dt.
inline std::vector<double> sis_inner_step(const SisConfig& cfg, ActionId a,
                                          std::vector<double> infected) {
  std::vector<double> scratch(infected.size());
  detail::sis_euler_step(cfg, a.index(), infected, scratch);
  return infected;
}

/// One outer step: ceil(1/dt) Euler steps.
inline std::vector<double> sis_step(const SisConfig& cfg, ActionId a,
                                    std::vector<double> infected) {
  if (infected.size() != cfg.nodes) throw InvalidInput("sis_step: dimension mismatch");
  std::vector<double> scratch(infected.size());
  for (int s = 0, n = cfg.inner_steps(); s < n; ++s)
    detail::sis_euler_step(cfg, a.index(), infected, scratch);
  return infected;
}

/// max_i (1 - beta_a dt (A_a I)_i): the per-Euler-step l1 contraction factor
/// towards the endemic equilibrium.
inline double sis_contraction_factor(const SisConfig& cfg, ActionId a,
                                     const std::vector<double>& infected) {
  if (infected.size() != cfg.nodes) throw InvalidInput("sis_contraction_factor: dimension mismatch");
  std::vector<double> ai(infected.size());
  cfg.adjacency[a.index()].multiply(infected.data(), ai.data());
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : ai) worst = std::max(worst, 1.0 - cfg.beta[a.index()] * cfg.dt * x);
  return worst;
}

class SisEnv final : public EnvironmentModel {
 public:
  explicit SisEnv(SisConfig cfg)
      : EnvironmentModel(EnvironmentTraits{
            "sis", cfg.actions(), cfg.nodes, cfg.sigma, Norm::kL1,
            ConvergenceKnowledge{std::max(1.0, 1.0 / cfg.alpha_lb), cfg.lipschitz, cfg.sigma},
            false}),
        cfg_(std::move(cfg)) {
    validate_sis_config(cfg_);
    traits_.knowledge.validate();
    cost_lo_ = std::numeric_limits<double>::infinity();
    cost_hi_ = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < cfg_.actions(); ++a) {
      double total = cfg_.w0[static_cast<std::size_t>(a)];
      for (double x : cfg_.w[static_cast<std::size_t>(a)]) total += x;
      cost_lo_ = std::min(cost_lo_, cfg_.w0[static_cast<std::size_t>(a)]);
      cost_hi_ = std::max(cost_hi_, total);
    }
  }

  const SisConfig& config() const { return cfg_; }

  /// w0_a + w_a . I
  double cost(ActionId a, const StateVector& infected) const {
    check(a, infected);
    const auto& w = cfg_.w[a.index()];
    double c = cfg_.w0[a.index()];
    for (std::size_t i = 0; i < w.size(); ++i) c += w[i] * infected[i];
    return c;
  }

  /// Cost range over every action and every I in [0,1]^M; rewards map it
  /// affinely onto [1, 0].
  double cost_lower() const { return cost_lo_; }
  double cost_upper() const { return cost_hi_; }

  StateVector initial_state() const override { return StateVector(cfg_.nodes, 0.5); }

  StateVector sample_state(Rng& rng) const override {
    StateVector z(cfg_.nodes);
    for (auto& x : z) x = uniform(rng, cfg_.feasible_lower, 1.0);
    return z;
  }

  StateVector sample_initial_state(Rng& rng) const override {
    StateVector z(cfg_.nodes);
    for (auto& x : z) x = uniform(rng, cfg_.init_lower, cfg_.init_upper);
    return z;
  }

 protected:
  StateVector evolve_unchecked(ActionId a, const StateVector& z) const override {
    return sis_step(cfg_, a, z);
  }

  double reward_unchecked(ActionId a, const StateVector& z) const override {
    return (cost_hi_ - cost(a, z)) / (cost_hi_ - cost_lo_);
  }

 private:
  SisConfig cfg_;
  double cost_lo_ = 0.0;
  double cost_hi_ = 1.0;
};

struct NetworkSisOptions {
  std::size_t nodes = 10;
  std::vector<double> beta{0.011, 0.012, 0.013, 0.014};
  double gamma = 0.01;
  double dt = 0.1;
  double edge_probability = 0.4;
  double row_sum_lo = 3.0;
  double row_sum_hi = 5.0;
  double alpha_lb = 0.0035;
  double lipschitz = 1.0;
  double sigma = 0.0;
  double feasible_lower = 0.1;
  double init_lower = 0.1;
  double init_upper = 0.2;
  int max_attempts = 1000;
};

namespace detail {

inline bool connected(const SquareMatrix& m) {
  std::vector<bool> seen(m.n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t i = q.front();
    q.pop();
    for (std::size_t j = 0; j < m.n; ++j)
      if (m(i, j) > 0.0 && !seen[j]) {
        seen[j] = true;
        ++count;
        q.push(j);
      }
  }
  return count == m.n;
}

/// Random sparse symmetric contact matrix with every row sum in [lo, hi]:
/// Erdos-Renyi support, uniform weights, then symmetric diagonal scaling
/// D A D towards per-row targets drawn in [lo, hi].
inline bool try_contact_matrix(Rng& rng, const NetworkSisOptions& opt, SquareMatrix& out) {
  const std::size_t n = opt.nodes;
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < opt.edge_probability) {
        const double w = 1.0 - uniform01(rng);
        m(i, j) = w;
        m(j, i) = w;
      }
  if (n > 1 && !connected(m)) return false;
  if (n == 1) m(0, 0) = 1.0;
  std::vector<double> target(n);
  for (auto& t : target) t = uniform(rng, opt.row_sum_lo, opt.row_sum_hi);
  std::vector<double> scale(n);
  for (int it = 0; it < 500; ++it) {
    for (std::size_t i = 0; i < n; ++i) scale[i] = std::sqrt(target[i] / m.row_sum(i));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) *= scale[i] * scale[j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  for (std::size_t i = 0; i < n; ++i) {
    const double r = m.row_sum(i);
    if (!(r >= opt.row_sum_lo && r <= opt.row_sum_hi)) return false;
  }
  out = std::move(m);
  return true;
}

}  // namespace detail

/// The epidemic instance used in the experiments: K actions with increasing
/// infection rates, random contact graphs and random cost weights, all drawn
/// from `seed`.
inline SisConfig make_network_sis_config(std::uint64_t seed, const NetworkSisOptions& opt = {}) {
  SisConfig cfg;
  cfg.nodes = opt.nodes;
  cfg.beta = opt.beta;
  cfg.gamma = opt.gamma;
  cfg.dt = opt.dt;
  cfg.alpha_lb = opt.alpha_lb;
  cfg.lipschitz = opt.lipschitz;
  cfg.sigma = opt.sigma;
  cfg.feasible_lower = opt.feasible_lower;
  cfg.init_lower = opt.init_lower;
  cfg.init_upper = opt.init_upper;
  Rng rng = make_rng(seed, 0, Stream::kConstruction);
  for (std::size_t a = 0; a < opt.beta.size(); ++a) {
    SquareMatrix m;
    bool ok = false;
    for (int attempt = 0; attempt < opt.max_attempts && !ok; ++attempt) {
      ok = detail::try_contact_matrix(rng, opt, m) && opt.beta[a] * perron_root(m) > opt.gamma;
    }
    if (!ok)
      throw InvalidInput("sis: could not generate a valid contact matrix for action " +
                         std::to_string(a + 1));
    cfg.adjacency.push_back(std::move(m));
  }
  for (std::size_t a = 0; a < opt.beta.size(); ++a) {
    cfg.w0.push_back(1.0 - uniform01(rng));
    std::vector<double> w(opt.nodes);
    for (auto& x : w) x = 1.0 - uniform01(rng);
    cfg.w.push_back(std::move(w));
  }
  return cfg;
}

inline SisEnv build_network_sis(std::uint64_t seed, const NetworkSisOptions& opt = {}) {
  return SisEnv(make_network_sis_config(seed, opt));
}

}  // namespace eqbandit

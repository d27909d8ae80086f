#pragma once

// Realization loop, multi-seed runner and aggregation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/harness/registry.hpp"
#include "eqbandit/policy.hpp"

namespace eqbandit {

/// Error raised inside a realization, tagged with the failing timestep.
class RealizationError : public Error {
 public:
  RealizationError(const std::string& what, std::int64_t t)
      : Error("t=" + std::to_string(t) + ": " + what), t_(t) {}
  std::int64_t timestep() const { return t_; }

 private:
  std::int64_t t_;
};

/// Runs `policy` for exactly `horizon` steps from `z0`. Observation noise comes
/// from `noise`; regret is measured against the optimal equilibrium reward.
inline RegretTrajectory run_realization(const EnvironmentModel& env, const EquilibriumInfo& info,
                                        Policy& policy, std::int64_t horizon, StateVector z0,
                                        Rng& noise) {
  if (horizon < 1) throw InvalidInput("run_realization: horizon must be >= 1");
  RegretTrajectory traj;
  traj.reserve(static_cast<std::size_t>(horizon));
  const double best = info.optimal_reward();
  StateVector z = std::move(z0);
  std::int64_t t = 1;
  try {
    for (; t <= horizon; ++t) {
      const ActionId a = policy.select();
      StepResult r = step_environment(env, a, z, noise);
      policy.observe(a, r.noisy_reward);
      accumulate_regret(traj, best, r.expected_reward, r.noisy_reward, a);
      z = std::move(r.next_state);
    }
    policy.finish();
  } catch (const RealizationError&) {
    throw;
  } catch (const std::exception& e) {
    throw RealizationError(e.what(), std::min(t, horizon));
  }
  return traj;
}

struct RunSettings {
  std::int64_t horizon = 1000;
  std::int64_t seeds = 20;
  std::uint64_t master_seed = 1;
  int workers = 1;
  bool random_init = false;
};

/// Realization `child`: fresh policy, noise and initial-state streams derived
/// from (master_seed, child) only.
inline RegretTrajectory run_seed(const EnvironmentModel& env, const EquilibriumInfo& info,
                                 const AlgorithmEntry& algo, const RunSettings& run,
                                 std::uint64_t child) {
  auto policy = algo.make(run.master_seed, child);
  Rng noise = make_rng(run.master_seed, child, Stream::kNoise);
  StateVector z0 = env.initial_state();
  if (run.random_init) {
    Rng init = make_rng(run.master_seed, child, Stream::kInitialState);
    z0 = env.sample_initial_state(init);
  }
  return run_realization(env, info, *policy, run.horizon, std::move(z0), noise);
}

/// All seeds of one algorithm; results are stored by seed index regardless of
/// which worker finished first.
inline std::vector<RegretTrajectory> run_all_seeds(const EnvironmentModel& env,
                                                   const EquilibriumInfo& info,
                                                   const AlgorithmEntry& algo,
                                                   const RunSettings& run) {
  if (run.seeds < 1) throw InvalidInput("run: seeds must be >= 1");
  const auto n = static_cast<std::size_t>(run.seeds);
  std::vector<RegretTrajectory> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        out[k] = run_seed(env, info, algo, run, k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::clamp<int>(run.workers, 1, static_cast<int>(n));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct CurveStats {
  std::vector<double> mean;
  std::vector<double> stdev;
};

/// Pointwise mean and population standard deviation.
inline CurveStats aggregate_curves(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) throw InvalidInput("aggregate: no curves");
  const std::size_t len = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != len) throw InvalidInput("aggregate: curves have different horizons");
  CurveStats s;
  s.mean.assign(len, 0.0);
  s.stdev.assign(len, 0.0);
  const double n = static_cast<double>(curves.size());
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[t];
    const double m = sum / n;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[t] - m) * (c[t] - m);
    s.mean[t] = m;
    s.stdev[t] = std::sqrt(ss / n);
  }
  return s;
}

struct SeedFinal {
  std::uint64_t seed = 0;
  double pseudo = 0.0;
  double realized = 0.0;
};

struct AggregateResult {
  std::string label;
  std::vector<double> mean;  ///< mean cumulative pseudo-regret, t = 1..T
  std::vector<double> stdev;
  std::vector<SeedFinal> finals;
};

inline AggregateResult aggregate(const std::string& label,
                                 const std::vector<RegretTrajectory>& trajectories) {
  std::vector<std::vector<double>> curves;
  curves.reserve(trajectories.size());
  AggregateResult r;
  r.label = label;
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    curves.push_back(trajectories[k].pseudo_regret);
    r.finals.push_back({k, trajectories[k].final_pseudo(), trajectories[k].final_realized()});
  }
  auto stats = aggregate_curves(curves);
  r.mean = std::move(stats.mean);
  r.stdev = std::move(stats.stdev);
  return r;
}

}  // namespace eqbandit

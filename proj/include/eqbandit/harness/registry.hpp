#pragma once

// Builds environments and policies from config sections.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eqbandit/baselines.hpp"
#include "eqbandit/core.hpp"
#include "eqbandit/env/game.hpp"
#include "eqbandit/env/linear_contraction.hpp"
#include "eqbandit/env/sis.hpp"
#include "eqbandit/env/synthetic.hpp"
#include "eqbandit/harness/config.hpp"
#include "eqbandit/policy.hpp"
#include "eqbandit/uecb.hpp"

namespace eqbandit {

inline std::shared_ptr<const EnvironmentModel> build_environment(Params p) {
  const std::string name = p.text("name");
  std::shared_ptr<const EnvironmentModel> env;

  if (name == "linear") {
    const auto z_star = p.numbers("z_star");
    const auto contraction = p.numbers("contraction");
    const auto x_star = p.numbers("x_star");
    const auto slope = p.numbers("slope", std::vector<double>(z_star.size(), 1.0));
    if (contraction.size() != z_star.size() || x_star.size() != z_star.size() ||
        slope.size() != z_star.size())
      throw ConfigError("[environment] linear: z_star, contraction, x_star, slope differ in length");
    std::vector<LinearArm> arms;
    for (std::size_t i = 0; i < z_star.size(); ++i)
      arms.push_back(LinearArm{z_star[i], contraction[i], x_star[i], slope[i]});
    const double sigma = p.number("sigma", 0.0);
    ConvergenceKnowledge k = LinearContractionEnv::default_knowledge(arms, sigma);
    k.tau_c = p.number("tau_c", k.tau_c);
    k.lipschitz_L = p.number("lipschitz", k.lipschitz_L);
    env = std::make_shared<LinearContractionEnv>(std::move(arms), p.number("initial", 0.0), sigma, k);
  } else if (name == "sis_network") {
    NetworkSisOptions o;
    const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
    o.nodes = static_cast<std::size_t>(p.integer("nodes", static_cast<std::int64_t>(o.nodes)));
    o.beta = p.numbers("beta", o.beta);
    o.gamma = p.number("gamma", o.gamma);
    o.dt = p.number("dt", o.dt);
    o.edge_probability = p.number("edge_probability", o.edge_probability);
    o.row_sum_lo = p.number("row_sum_lo", o.row_sum_lo);
    o.row_sum_hi = p.number("row_sum_hi", o.row_sum_hi);
    o.alpha_lb = p.number("alpha", o.alpha_lb);
    o.lipschitz = p.number("lipschitz", o.lipschitz);
    o.sigma = p.number("sigma", o.sigma);
    o.feasible_lower = p.number("feasible_lower", o.feasible_lower);
    o.init_lower = p.number("init_lower", o.init_lower);
    o.init_upper = p.number("init_upper", o.init_upper);
    env = std::make_shared<SisEnv>(build_network_sis(seed, o));
  } else if (name == "game_network") {
    NetworkGameOptions o;
    const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
    o.players = static_cast<std::size_t>(p.integer("players", static_cast<std::int64_t>(o.players)));
    o.resources =
        static_cast<std::size_t>(p.integer("resources", static_cast<std::int64_t>(o.resources)));
    o.actions = static_cast<int>(p.integer("actions", o.actions));
    o.access_probability = p.number("access_probability", o.access_probability);
    o.coefficient_lo = p.number("coefficient_lo", o.coefficient_lo);
    o.coefficient_hi = p.number("coefficient_hi", o.coefficient_hi);
    o.z_max = p.number("z_max", o.z_max);
    o.alpha = p.number("alpha", o.alpha);
    o.sigma = p.number("sigma", o.sigma);
    o.lipschitz = p.number("lipschitz", o.lipschitz);
    env = std::make_shared<GameEnv>(build_network_game(seed, o));
  } else if (name == "ucb_breaker") {
    env = std::make_shared<UcbBreakerEnv>(build_ucb_breaker());
  } else if (name == "lower_bound") {
    const double gap = p.number("gap");
    const double tau_c = p.number("tau_c");
    env = std::make_shared<LowerBoundPairEnv>(gap, tau_c, p.number("sigma", 0.0));
  } else {
    throw ConfigError("[environment] unknown name '" + name + "'");
  }
  p.finish();
  return env;
}

/// Creates a fresh policy for realization `child` of `master`.
using PolicyFactory = std::function<std::unique_ptr<Policy>(std::uint64_t master, std::uint64_t child)>;

struct AlgorithmEntry {
  std::string label;
  std::string type;
  std::map<std::string, double> settings;  ///< resolved numeric settings, for metadata
  PolicyFactory make;
};

/// Expands one [algorithm.<label>] section. A naive section with several
/// t_try values yields one entry per value, labelled <label>_<t_try>.
inline std::vector<AlgorithmEntry> build_algorithms(const std::string& label, Params p,
                                                    const EnvironmentModel& env,
                                                    std::int64_t horizon) {
  const std::string type = p.text("type", label);
  const int arms = env.action_count();
  std::vector<AlgorithmEntry> out;

  auto need_horizon = [&](std::int64_t block) {
    if (horizon < static_cast<std::int64_t>(arms) * block)
      throw ConfigError("[algorithm." + label + "] horizon " + std::to_string(horizon) +
                        " is shorter than one block per arm (" +
                        std::to_string(arms * block) + ")");
  };

  if (type == "uecb" || type == "uecb_noiseless") {
    UecbParams params;
    params.mode = type == "uecb" ? UecbMode::kNoisy : UecbMode::kNoiseless;
    params.rho1 = p.number("rho1", params.rho1);
    params.rho2 = p.number("rho2", params.rho2);
    params.knowledge = env.knowledge();
    params.knowledge.tau_c = p.number("tau_c", params.knowledge.tau_c);
    params.knowledge.lipschitz_L = p.number("lipschitz", params.knowledge.lipschitz_L);
    params.knowledge.sigma = p.number("sigma", params.knowledge.sigma);
    params.validate();
    need_horizon(epoch_length(0, params));
    out.push_back({label, type,
                   {{"rho1", params.rho1},
                    {"rho2", params.rho2},
                    {"tau_c", params.knowledge.tau_c},
                    {"lipschitz", params.knowledge.lipschitz_L},
                    {"sigma", params.knowledge.sigma}},
                   [arms, params](std::uint64_t, std::uint64_t) {
                     return std::make_unique<UecbPolicy>(arms, params);
                   }});
  } else if (type == "naive") {
    const auto tries = p.integers("t_try");
    if (tries.empty()) throw ConfigError("[algorithm." + label + "] t_try is empty");
    for (auto t_try : tries) {
      if (t_try < 1) throw ConfigError("[algorithm." + label + "] t_try must be >= 1");
      need_horizon(t_try);
      const NaiveParams params{t_try};
      out.push_back({tries.size() == 1 ? label : label + "_" + std::to_string(t_try), type,
                     {{"t_try", static_cast<double>(t_try)}},
                     [arms, params](std::uint64_t, std::uint64_t) {
                       return std::make_unique<NaivePolicy>(arms, params);
                     }});
    }
  } else if (type == "ucb") {
    const double sigma = p.number("sigma", env.noise_sigma());
    out.push_back({label, type, {{"sigma", sigma}}, [arms, sigma](std::uint64_t, std::uint64_t) {
                     return std::make_unique<UcbPolicy>(arms, sigma);
                   }});
  } else if (type == "exp3" || type == "rexp3") {
    Exp3Params params;
    params.learning_rate = p.number("learning_rate", default_exp3_rate(arms, horizon));
    if (type == "rexp3")
      params.restart_window = p.integer("restart_window", default_restart_window(horizon));
    params.validate();
    std::map<std::string, double> settings{{"learning_rate", params.learning_rate}};
    if (params.restart_window) settings["restart_window"] = static_cast<double>(*params.restart_window);
    out.push_back({label, type, settings, [arms, params](std::uint64_t master, std::uint64_t child) {
                     return std::make_unique<Exp3Policy>(arms, params,
                                                         make_rng(master, child, Stream::kPolicy));
                   }});
  } else {
    throw ConfigError("[algorithm." + label + "] unknown type '" + type + "'");
  }
  p.finish();
  return out;
}

}  // namespace eqbandit

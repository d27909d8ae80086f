#pragma once

// Command-line front end: run / equilibria / validate.
//
// Exit codes: 0 success, 1 invalid config, 2 runtime failure or a violated
// check.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "eqbandit/core.hpp"
#include "eqbandit/env/game.hpp"
#include "eqbandit/env/matrix.hpp"
#include "eqbandit/env/sis.hpp"
#include "eqbandit/harness/config.hpp"
#include "eqbandit/harness/export.hpp"
#include "eqbandit/harness/registry.hpp"
#include "eqbandit/harness/runner.hpp"

namespace eqbandit {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::int64_t> seeds;
  std::optional<std::int64_t> horizon;
  std::optional<int> workers;
};

/// Everything a subcommand needs, resolved from one config file.
struct Experiment {
  ConfigFile file;
  RunSettings run;
  std::string out_dir = "results";
  ExportOptions export_opt;
  std::shared_ptr<const EnvironmentModel> env;
  std::vector<AlgorithmEntry> algorithms;
};

/// Parses and resolves a config. Throws ConfigError/InvalidInput on bad input.
inline Experiment prepare_experiment(const std::string& config_path, const CliOverrides& ov,
                                     bool with_algorithms) {
  Experiment ex;
  ex.file = load_config(config_path);
  Params run = ex.file.run;
  ex.run.horizon = run.integer("horizon", ex.run.horizon);
  ex.run.seeds = run.integer("seeds", ex.run.seeds);
  ex.run.master_seed = static_cast<std::uint64_t>(run.integer("master_seed", 1));
  ex.run.workers = static_cast<int>(
      run.integer("workers", std::max(1u, std::thread::hardware_concurrency())));
  ex.run.random_init = run.flag("random_init", false);
  ex.out_dir = run.text("out", ex.out_dir);
  std::int64_t stride = run.integer("record_stride", 0);
  ex.export_opt.per_seed_curves = run.flag("per_seed_curves", false);
  run.finish();

  if (ov.out) ex.out_dir = *ov.out;
  if (ov.seeds) ex.run.seeds = *ov.seeds;
  if (ov.horizon) ex.run.horizon = *ov.horizon;
  if (ov.workers) ex.run.workers = *ov.workers;
  if (ex.run.horizon < 1) throw ConfigError("[run] horizon must be >= 1");
  if (ex.run.seeds < 1) throw ConfigError("[run] seeds must be >= 1");
  if (ex.run.workers < 1) throw ConfigError("[run] workers must be >= 1");
  if (stride < 0) throw ConfigError("[run] record_stride must be >= 1");
  ex.export_opt.record_stride = stride == 0 ? default_record_stride(ex.run.horizon) : stride;

  ex.env = build_environment(ex.file.environment);
  if (with_algorithms) {
    for (const auto& [label, params] : ex.file.algorithms) {
      auto entries = build_algorithms(label, params, *ex.env, ex.run.horizon);
      for (auto& e : entries) {
        for (const auto& have : ex.algorithms)
          if (have.label == e.label) throw ConfigError("duplicate algorithm label '" + e.label + "'");
        ex.algorithms.push_back(std::move(e));
      }
    }
  }
  return ex;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json equilibria_json(const EquilibriumInfo& info) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < info.entries.size(); ++i)
    arr.push_back({{"action", i + 1},
                   {"x_star", info.entries[i].x_star},
                   {"delta", info.delta[i]},
                   {"iterations", info.entries[i].iterations},
                   {"residual", info.entries[i].residual}});
  return arr;
}

inline nlohmann::json experiment_meta(const Experiment& ex, const EquilibriumInfo& info) {
  nlohmann::json config = nlohmann::json::object();
  config["environment"] = ex.file.environment.values();
  for (const auto& [label, p] : ex.file.algorithms) config["algorithm." + label] = p.values();
  config["run"] = ex.file.run.values();

  nlohmann::json algos = nlohmann::json::array();
  for (const auto& a : ex.algorithms)
    algos.push_back({{"label", a.label}, {"type", a.type}, {"settings", a.settings}});

  const auto& k = ex.env->knowledge();
  return {
      {"version", kVersion},
      {"config_hash", format_hash(fnv1a(ex.file.source))},
      {"config", config},
      {"run",
       {{"horizon", ex.run.horizon},
        {"seeds", ex.run.seeds},
        {"master_seed", ex.run.master_seed},
        {"random_init", ex.run.random_init},
        {"record_stride", ex.export_opt.record_stride},
        {"out", ex.out_dir}}},
      {"environment",
       {{"name", ex.env->name()},
        {"actions", ex.env->action_count()},
        {"state_dim", ex.env->state_dim()},
        {"noise_sigma", ex.env->noise_sigma()},
        {"norm", to_string(ex.env->norm())},
        {"tau_c", k.tau_c},
        {"lipschitz", k.lipschitz_L}}},
      {"equilibria", equilibria_json(info)},
      {"optimal_action", info.optimal_action.value},
      {"optimal_tie", info.tie},
      {"algorithms", algos},
  };
}

inline int cmd_run(const std::string& config, const CliOverrides& ov, std::ostream& out,
                   std::ostream& err) {
  Experiment ex;
  try {
    ex = prepare_experiment(config, ov, true);
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto started = std::chrono::steady_clock::now();
    const EquilibriumInfo info = compute_equilibria(*ex.env);
    if (info.tie) err << "warning: several actions share the optimal equilibrium reward\n";
    std::vector<AggregateResult> results;
    std::vector<std::vector<RegretTrajectory>> curves;
    for (const auto& algo : ex.algorithms) {
      auto trajs = run_all_seeds(*ex.env, info, algo, ex.run);
      results.push_back(aggregate(algo.label, trajs));
      out << algo.label << ": mean final pseudo-regret " << results.back().mean.back() << " (std "
          << results.back().stdev.back() << ")\n";
      if (ex.export_opt.per_seed_curves) curves.push_back(std::move(trajs));
      else curves.emplace_back();
    }
    nlohmann::json meta = experiment_meta(ex, info);
    meta["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    meta["timestamp"] = utc_timestamp();
    meta["sis_clamp_events"] = sis_clamp_events().load();
    export_results(results, curves, ex.out_dir, ex.export_opt, meta);
    out << "wrote " << ex.out_dir << '\n';
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

inline int cmd_equilibria(const std::string& config, const std::string& dump_dir,
                          std::ostream& out, std::ostream& err) {
  Experiment ex;
  try {
    ex = prepare_experiment(config, {}, false);
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const EquilibriumInfo info = compute_equilibria(*ex.env);
    out << std::setprecision(12);
    out << "action,x_star,delta,iterations,residual\n";
    for (std::size_t i = 0; i < info.entries.size(); ++i)
      out << i + 1 << ',' << info.entries[i].x_star << ',' << info.delta[i] << ','
          << info.entries[i].iterations << ',' << info.entries[i].residual << '\n';
    out << "x* = (";
    for (std::size_t i = 0; i < info.entries.size(); ++i)
      out << (i ? ", " : "") << info.entries[i].x_star;
    out << ")\na* = " << info.optimal_action.value << '\n';
    if (info.tie) out << "warning: optimal action is not unique; lowest index chosen\n";

    if (!dump_dir.empty()) {
      const auto* sis = dynamic_cast<const SisEnv*>(ex.env.get());
      if (!sis) throw InvalidInput("--dump-matrices needs an sis environment");
      std::filesystem::create_directories(dump_dir);
      for (int a = 1; a <= sis->action_count(); ++a) {
        const auto path = std::filesystem::path(dump_dir) / ("adjacency_" + std::to_string(a) + ".txt");
        write_matrix(path.string(), sis->config().adjacency[static_cast<std::size_t>(a - 1)]);
      }
      out << "matrices written to " << dump_dir << '\n';
    }
  } catch (const std::exception& e) {
    err << "equilibria failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct ContractionReport {
  ActionId action;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  double bound = 1.0;
  double min_reward = std::numeric_limits<double>::infinity();
  double max_reward = -std::numeric_limits<double>::infinity();
  bool ok = true;
};

/// Empirical one-step contraction ratio |g(z) - z*| / |z - z*| over `samples`
/// random feasible states, against the declared exp(-1/tau_c). A state fails
/// when |g(z) - z*| > exp(-1/tau_c) |z - z*| + 1e-9.
inline ContractionReport check_contraction(const EnvironmentModel& env, ActionId a,
                                           const StateVector& z_star, int samples, Rng& rng) {
  ContractionReport r;
  r.action = a;
  r.bound = env.knowledge().contraction_bound();
  for (int s = 0; s < samples; ++s) {
    const StateVector z = env.sample_state(rng);
    const double before = distance(env.norm(), z, z_star);
    const double reward = env.expected_reward(a, z);
    r.min_reward = std::min(r.min_reward, reward);
    r.max_reward = std::max(r.max_reward, reward);
    if (!env.exempt_from_normalization() && !(reward >= 0.0 && reward <= 1.0)) r.ok = false;
    if (before < 1e-12) continue;
    const double after = distance(env.norm(), env.evolve(a, z), z_star);
    r.min_ratio = std::min(r.min_ratio, after / before);
    r.max_ratio = std::max(r.max_ratio, after / before);
    if (after > r.bound * before + 1e-9) r.ok = false;
  }
  return r;
}

inline int cmd_validate(const std::string& config, std::ostream& out, std::ostream& err) {
  Experiment ex;
  try {
    ex = prepare_experiment(config, {}, false);
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
  bool ok = true;
  try {
    const auto& env = *ex.env;
    const EquilibriumInfo info = compute_equilibria(env);
    out << std::setprecision(8);
    out << env.name() << ": K=" << env.action_count() << " dim=" << env.state_dim()
        << " tau_c=" << env.knowledge().tau_c << " L=" << env.knowledge().lipschitz_L
        << " sigma=" << env.noise_sigma() << '\n';
    Rng rng = make_rng(ex.run.master_seed, 0, Stream::kConstruction);
    for (int a = 1; a <= env.action_count(); ++a) {
      const auto& z_star = info.entries[static_cast<std::size_t>(a - 1)].z_star;
      const auto r = check_contraction(env, ActionId(a), z_star, 1000, rng);
      out << "action " << a << ": contraction ratio min " << r.min_ratio << " max " << r.max_ratio
          << " (bound " << r.bound << "), reward range [" << r.min_reward << ", " << r.max_reward
          << "]" << (r.ok ? "" : "  VIOLATION") << '\n';
      ok = ok && r.ok;

      if (const auto* sis = dynamic_cast<const SisEnv*>(&env)) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        Rng srng = make_rng(ex.run.master_seed, static_cast<std::uint64_t>(a), Stream::kConstruction);
        for (int s = 0; s < 1000; ++s) {
          const double f = sis_contraction_factor(sis->config(), ActionId(a), sis->sample_state(srng));
          lo = std::min(lo, f);
          hi = std::max(hi, f);
        }
        out << "  inner-step factor max_i(1 - beta dt (A I)_i): min " << lo << " max " << hi
            << "; outer-step max " << std::pow(hi, sis->config().inner_steps()) << '\n';
      }
      if (const auto* game = dynamic_cast<const GameEnv*>(&env)) {
        const auto& b = game->bounds(ActionId(a));
        out << "  lambda " << b.lambda << " beta " << b.beta << " alpha " << game->config().alpha
            << " factor " << game->contraction_factor(ActionId(a)) << '\n';
      }
    }
    out << "a* = " << info.optimal_action.value << (info.tie ? " (tie)" : "") << '\n';
  } catch (const std::exception& e) {
    err << "validation failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << (ok ? "all checks passed" : "checks FAILED") << '\n';
  return ok ? kExitOk : kExitRuntime;
}

inline int cli_main(int argc, char** argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Equilibrium bandit experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config;
  CliOverrides ov;
  std::string out_dir;
  std::int64_t seeds = 0, horizon = 0;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run every configured algorithm over all seeds");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seeds", seeds, "Number of seeds");
  run->add_option("--horizon", horizon, "Horizon T");
  run->add_option("--workers", workers, "Parallel realizations");

  std::string dump_dir;
  auto* eq = app.add_subcommand("equilibria", "Print equilibrium rewards, gaps and the optimal action");
  eq->add_option("--config", config, "Config file")->required();
  eq->add_option("--dump-matrices", dump_dir, "Write contact matrices (sis only)");

  auto* val = app.add_subcommand("validate", "Check contraction and reward-range assumptions");
  val->add_option("--config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    if (run->count("--out")) ov.out = out_dir;
    if (run->count("--seeds")) ov.seeds = seeds;
    if (run->count("--horizon")) ov.horizon = horizon;
    if (run->count("--workers")) ov.workers = workers;
    return cmd_run(config, ov, out, err);
  }
  if (*eq) return cmd_equilibria(config, dump_dir, out, err);
  return cmd_validate(config, out, err);
}

}  // namespace eqbandit

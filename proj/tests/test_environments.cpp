#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "eqbandit/env/game.hpp"
#include "eqbandit/env/linear_contraction.hpp"
#include "eqbandit/env/matrix.hpp"
#include "eqbandit/env/sis.hpp"
#include "eqbandit/env/synthetic.hpp"

namespace eqbandit {
namespace {

SisConfig scalar_sis() {
  SisConfig cfg;
  cfg.nodes = 1;
  cfg.adjacency = {SquareMatrix(1, 1.0)};
  cfg.beta = {0.02};
  cfg.gamma = 0.01;
  cfg.dt = 0.1;
  cfg.w0 = {0.5};
  cfg.w = {{0.5}};
  cfg.feasible_lower = 0.01;
  cfg.init_lower = 0.01;
  cfg.init_upper = 0.1;
  return cfg;
}

GameConfig single_player_game() {
  GameConfig cfg;
  cfg.value = {1.0};
  cfg.price = {1.0};
  cfg.masks = {{true}};
  return cfg;
}

GameEnv small_game(std::uint64_t seed = 1) {
  NetworkGameOptions o;
  o.players = 20;
  o.resources = 5;
  return build_network_game(seed, o);
}

// ---------------------------------------------------------------------------
// SIS

TEST(SisTest, DiseaseFreeStateIsFixed) {
  const auto cfg = scalar_sis();
  EXPECT_EQ(sis_step(cfg, ActionId(1), {0.0}), std::vector<double>{0.0});
}

TEST(SisTest, ScalarEndemicStateIsExactFixedPoint) {
  EXPECT_EQ(sis_step(scalar_sis(), ActionId(1), {0.5}), std::vector<double>{0.5});
}

TEST(SisTest, ScalarInnerStep) {
  const auto next = sis_inner_step(scalar_sis(), ActionId(1), {0.25});
  EXPECT_NEAR(next[0], 0.250125, 1e-15);
}

TEST(SisTest, ContractionFactorExamples) {
  const auto cfg = scalar_sis();
  EXPECT_EQ(sis_contraction_factor(cfg, ActionId(1), {0.0}), 1.0);
  EXPECT_NEAR(sis_contraction_factor(cfg, ActionId(1), {0.5}), 0.999, 1e-15);
}

TEST(SisTest, UnstableStepThrows) {
  auto cfg = scalar_sis();
  cfg.beta = {2.0};
  cfg.dt = 0.9;
  EXPECT_THROW(sis_step(cfg, ActionId(1), {1.0}), DynamicsInstability);
}

TEST(SisTest, RejectsSubthresholdAction) {
  auto cfg = scalar_sis();
  cfg.beta = {0.005};
  EXPECT_THROW(SisEnv{cfg}, InvalidInput);
}

TEST(SisTest, RewardIsAffineInCost) {
  const SisEnv env(scalar_sis());
  EXPECT_DOUBLE_EQ(env.expected_reward(ActionId(1), {0.0}), 1.0);
  EXPECT_DOUBLE_EQ(env.expected_reward(ActionId(1), {1.0}), 0.0);
  EXPECT_DOUBLE_EQ(env.expected_reward(ActionId(1), {0.5}), 0.5);
}

TEST(NetworkSisTest, Construction) {
  const auto env = build_network_sis(1);
  const auto& cfg = env.config();
  EXPECT_EQ(env.action_count(), 4);
  EXPECT_EQ(env.state_dim(), 10u);
  EXPECT_EQ(cfg.gamma, 0.01);
  EXPECT_EQ(cfg.beta, (std::vector<double>{0.011, 0.012, 0.013, 0.014}));
  EXPECT_EQ(env.knowledge().lipschitz_L, 1.0);
  for (const auto& a : cfg.adjacency) {
    EXPECT_TRUE(a.is_symmetric());
    for (std::size_t i = 0; i < a.n; ++i) {
      EXPECT_GE(a.row_sum(i), 3.0);
      EXPECT_LE(a.row_sum(i), 5.0);
    }
  }
  for (std::size_t a = 0; a < cfg.beta.size(); ++a) {
    EXPECT_GT(cfg.w0[a], 0.0);
    EXPECT_LE(cfg.w0[a], 1.0);
    for (double w : cfg.w[a]) {
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
  }
}

TEST(NetworkSisTest, SeedDeterminesInstance) {
  const auto a = make_network_sis_config(7), b = make_network_sis_config(7), c = make_network_sis_config(8);
  for (std::size_t k = 0; k < a.adjacency.size(); ++k) EXPECT_EQ(a.adjacency[k].data, b.adjacency[k].data);
  EXPECT_EQ(a.w, b.w);
  EXPECT_NE(a.adjacency[0].data, c.adjacency[0].data);
}

// The l1 distance to the endemic state shrinks by the state-dependent factor
// at every Euler step.
TEST(NetworkSisTest, EulerStepContractsTowardsEquilibrium) {
  const auto env = build_network_sis(2);
  const auto info = compute_equilibria(env);
  Rng rng = make_rng(2, 0, Stream::kInitialState);
  for (int a = 1; a <= env.action_count(); ++a) {
    const auto& star = info.entries[static_cast<std::size_t>(a - 1)].z_star;
    for (int start = 0; start < 5; ++start) {
      StateVector z = env.sample_state(rng);
      for (int k = 0; k < 300; ++k) {
        const double factor = sis_contraction_factor(env.config(), ActionId(a), z);
        const StateVector next = sis_inner_step(env.config(), ActionId(a), z);
        ASSERT_LE(distance(Norm::kL1, next, star), factor * distance(Norm::kL1, z, star) + 1e-9);
        z = next;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Resource-allocation game

TEST(GameTest, ContractionFactorExamples) {
  EXPECT_EQ(game_contraction_factor(1.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(game_contraction_factor(0.7, 1.3, 2.0 * 0.7 / (1.3 * 1.3)), 1.0, 1e-12);
  EXPECT_NEAR(game_contraction_factor(0.5, 1.0, 0.5), 0.866025403784439, 1e-12);
  EXPECT_THROW(game_contraction_factor(0.5, 1.0, 1.5), InvalidInput);
  EXPECT_THROW(game_contraction_factor(0.5, 1.0, 0.0), InvalidInput);
}

TEST(GameTest, SinglePlayerNash) {
  const GameEnv env(single_player_game());
  const double root = (std::sqrt(3.0) - 1.0) / 2.0;
  EXPECT_NEAR(env.nash(ActionId(1))[0], root, 1e-12);
  const auto eq = compute_equilibrium(env, ActionId(1));
  EXPECT_NEAR(eq.z_star[0], root, 1e-8);
}

TEST(GameTest, NashIsFixedPointOfGradientPlay) {
  const auto env = small_game();
  for (int a = 1; a <= env.action_count(); ++a) {
    const auto& z = env.nash(ActionId(a));
    const auto next = game_step(env.config(), ActionId(a), z);
    EXPECT_LT(distance(Norm::kL2, next, z), 1e-10) << "action " << a;
  }
}

TEST(GameTest, MaskedCoordinatesStayZero) {
  const auto env = small_game();
  const auto& cfg = env.config();
  Rng rng(4);
  for (int a = 1; a <= env.action_count(); ++a) {
    StateVector z = env.sample_state(rng);
    const auto& mask = cfg.masks[static_cast<std::size_t>(a - 1)];
    for (int t = 0; t < 50; ++t) {
      z = game_step(cfg, ActionId(a), z);
      for (std::size_t k = 0; k < z.size(); ++k)
        if (!mask[k]) {
          ASSERT_EQ(z[k], 0.0);
        }
    }
  }
}

TEST(GameTest, AnalyticBoundsBracketSampledOnes) {
  const auto env = small_game(3);
  Rng rng(11);
  for (int a = 1; a <= env.action_count(); ++a) {
    const auto sampled = game_sampled_bounds(env.config(), ActionId(a), rng, 200);
    EXPECT_LE(env.bounds(ActionId(a)).lambda, sampled.lambda);
    EXPECT_GE(env.bounds(ActionId(a)).beta, sampled.beta);
  }
}

TEST(GameTest, GradientPlayContracts) {
  const auto env = small_game();
  Rng rng(5);
  for (int a = 1; a <= env.action_count(); ++a) {
    const auto& star = env.nash(ActionId(a));
    const double factor = env.contraction_factor(ActionId(a));
    ASSERT_LT(factor, 1.0);
    StateVector z = env.sample_state(rng);
    for (int t = 0; t < 100; ++t) {
      const auto next = env.evolve(ActionId(a), z);
      ASSERT_LE(distance(Norm::kL2, next, star), factor * distance(Norm::kL2, z, star) + 1e-9);
      z = next;
    }
  }
}

TEST(GameTest, RejectsOversizedStep) {
  auto cfg = single_player_game();
  cfg.alpha = 10.0;
  EXPECT_THROW(GameEnv{cfg}, InvalidInput);
}

TEST(NetworkGameTest, Construction) {
  const auto cfg = make_network_game_config(1);
  EXPECT_EQ(cfg.resources, 10u);
  EXPECT_EQ(cfg.players, 1000u);
  for (std::size_t k = 0; k < cfg.dim(); ++k) {
    ASSERT_GE(cfg.value[k], 0.8);
    ASSERT_LE(cfg.value[k], 1.0);
    ASSERT_GE(cfg.price[k], 0.8);
    ASSERT_LE(cfg.price[k], 1.0);
  }
  for (const auto& mask : cfg.masks)
    for (std::size_t i = 0; i < cfg.players; ++i) {
      bool any = false;
      for (std::size_t l = 0; l < cfg.resources; ++l) any = any || mask[cfg.at(i, l)];
      ASSERT_TRUE(any) << "player " << i;
    }
}

TEST(NetworkGameTest, LoadsMatchScratchSum) {
  const auto env = build_network_game(1);
  const auto& cfg = env.config();
  Rng rng(6);
  StateVector z = env.sample_state(rng);
  for (int t = 0; t < 3; ++t) z = env.evolve(ActionId(2), z);
  const auto s = game_loads(cfg, ActionId(2), z);
  for (std::size_t l = 0; l < cfg.resources; ++l) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.players; ++i) sum += z[cfg.at(i, l)];
    EXPECT_NEAR(s[l], sum, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Counterexamples

TEST(UcbBreakerTest, TableEntries) {
  const auto env = build_ucb_breaker();
  EXPECT_EQ(env.evolve(ActionId(1), {0.5}), StateVector{-0.5});
  EXPECT_EQ(env.evolve(ActionId(1), {-0.5}), StateVector{-1.0});
  EXPECT_EQ(env.evolve(ActionId(1), {-1.0}), StateVector{-1.0});
  EXPECT_EQ(env.evolve(ActionId(2), {-0.5}), StateVector{0.5});
  EXPECT_EQ(env.evolve(ActionId(2), {0.5}), StateVector{1.5});
  EXPECT_EQ(env.evolve(ActionId(2), {1.5}), StateVector{1.5});
  EXPECT_EQ(env.expected_reward(ActionId(2), {1.5}), 2.25);
  EXPECT_EQ(env.expected_reward(ActionId(1), {-1.0}), 1.0);
  EXPECT_EQ(env.initial_state(), StateVector{0.5});
  EXPECT_EQ(env.noise_sigma(), 0.0);
}

TEST(UcbBreakerTest, Equilibria) {
  const auto info = compute_equilibria(build_ucb_breaker());
  EXPECT_EQ(info.entries[0].x_star, 1.0);
  EXPECT_EQ(info.entries[1].x_star, 2.25);
  EXPECT_EQ(info.optimal_action, ActionId(2));
}

TEST(UcbBreakerTest, OffTableStateIsDomainError) {
  const auto env = build_ucb_breaker();
  EXPECT_THROW(env.evolve(ActionId(1), {0.0}), DomainError);
  EXPECT_THROW(env.expected_reward(ActionId(1), {0.7}), DomainError);
}

TEST(LowerBoundPairTest, RewardPieces) {
  const auto env = build_lower_bound_pair(0.1, 10.0);
  EXPECT_NEAR(env.expected_reward(ActionId(2), {2.0}), 0.1, 1e-15);
  EXPECT_EQ(env.expected_reward(ActionId(2), {2.0 - 0.1}), 0.0);
  EXPECT_EQ(env.expected_reward(ActionId(2), {1.5}), 0.0);
  EXPECT_EQ(env.expected_reward(ActionId(1), {-2.0}), 0.0);
  EXPECT_EQ(env.evolve(ActionId(1), {0.5}), StateVector{-1.0});
  EXPECT_EQ(env.evolve(ActionId(2), {-0.5}), StateVector{1.0});
}

TEST(LowerBoundPairTest, Equilibria) {
  const auto info = compute_equilibria(build_lower_bound_pair(0.2, 5.0));
  EXPECT_NEAR(info.entries[0].z_star[0], -2.0, 1e-9);
  EXPECT_NEAR(info.entries[1].z_star[0], 2.0, 1e-9);
  EXPECT_EQ(info.optimal_action, ActionId(2));
  EXPECT_NEAR(info.delta[0], 0.2, 1e-9);
}

// Steps arm 2 from z = 1 and records how many steps it takes for the state to
// reach 2 - gap; the count must equal ceil(tau log(1/gap)).
TEST(LowerBoundPairTest, HiddenPrefixLength) {
  struct Case {
    double gap, tau;
    int expected;
  };
  for (const Case c : {Case{0.1, 10.0, 24}, Case{0.3, 5.0, 7}, Case{0.05, 20.0, 60}}) {
    const auto env = build_lower_bound_pair(c.gap, c.tau);
    StateVector z{1.0};
    int t = 0;
    while (z[0] < 2.0 - c.gap) {
      z = env.evolve(ActionId(2), z);
      ++t;
    }
    EXPECT_EQ(t, c.expected) << "gap " << c.gap << " tau " << c.tau;
    EXPECT_EQ(t, static_cast<int>(std::ceil(c.tau * std::log(1.0 / c.gap))));
  }
}

TEST(LowerBoundPairTest, RejectsBadGap) {
  EXPECT_THROW(build_lower_bound_pair(0.0, 10.0), InvalidInput);
  EXPECT_THROW(build_lower_bound_pair(1.0, 10.0), InvalidInput);
}

// ---------------------------------------------------------------------------
// Matrix files

TEST(MatrixTest, RoundTrip) {
  const auto cfg = make_network_sis_config(3);
  const auto dir = std::filesystem::temp_directory_path() / "eqb_matrix_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "adjacency_1.txt").string();
  write_matrix(path, cfg.adjacency[0]);
  const auto back = read_matrix(path);
  EXPECT_EQ(back.n, cfg.adjacency[0].n);
  EXPECT_EQ(back.data, cfg.adjacency[0].data);
  std::filesystem::remove_all(dir);
}

TEST(MatrixTest, PerronRootOfCycle) {
  SquareMatrix m(4);
  for (std::size_t i = 0; i < 4; ++i) {
    m(i, (i + 1) % 4) = 1.0;
    m((i + 1) % 4, i) = 1.0;
  }
  EXPECT_NEAR(perron_root(m), 2.0, 1e-10);
}

}  // namespace
}  // namespace eqbandit

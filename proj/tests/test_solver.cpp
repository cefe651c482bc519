// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "solver.hpp"
#include "tiny.hpp"

using namespace csg;
using csg::testing::blank_costs;
using csg::testing::random_costs;

namespace {

PathBundle bundle_for(const CostSurfaces& cs) { return PathBundle(cs.n_paths, cs.grid); }

// One path, one step, M = 1. Staying costs A 1 and B 0.2; after a flip A
// pays 0.5 and B 0.6, plus 0.1 each for the change whoever elects it.
CostSurfaces one_step_game() {
  CostSurfaces cs = blank_costs(1, 1, 0.1);
  cs.G[0][1][0] = 1.0;
  cs.G[0][0][0] = 0.5;
  cs.G[1][1][0] = 0.2;
  cs.G[1][0][0] = 0.6;
  return cs;
}

}  // namespace

TEST_CASE("zero costs: value zero, never switch") {
  const CostSurfaces cs = blank_costs(4, 3);
  GameSpec spec;
  spec.M = 2;
  SolverConfig cfg;
  const auto r = solve_single_agent(Player::A, bundle_for(cs), cs, spec, cfg);
  for (double v : r.backward.surface.V) CHECK(v == 0.0);
  CHECK(r.strategy.total_events() == 0);
  const auto rep = reflection_residuals(r.backward.surface, cs, 1e-12);
  CHECK(rep.pass);
  CHECK(rep.regime[1].total_K == 0.0);
}

TEST_CASE("single backward step by hand") {
  CostSurfaces cs = blank_costs(1, 1, 0.07);
  cs.F[0][1][0] = 0.4;
  cs.F[0][0][0] = 0.1;
  cs.G[0][1][0] = 0.9;
  cs.G[0][0][0] = 0.5;
  GameSpec spec;
  spec.M = 1;
  SolverConfig cfg;
  const auto r = backward_induction(Player::A, never_switch(1, 1, 1), bundle_for(cs), cs, spec, cfg);
  CHECK(r.surface.v(0, 0, 1, 1) == doctest::Approx(std::min(0.4 + 0.9, 0.07 + 0.1 + 0.5)).epsilon(1e-15));
  CHECK(r.surface.v(0, 0, 1, 0) == 0.4 + 0.9);
  CHECK(r.policy.elect(0, 0, 1, 1));
  CHECK_FALSE(r.policy.elect(0, 0, 1, 0));
}

TEST_CASE("one-step oracle matches hand enumeration") {
  const CostSurfaces cs = one_step_game();
  GameSpec spec;
  spec.M = 1;
  const OracleResult o = brute_force_oracle(cs, spec, 1000);
  SwitchingStrategy go{{{{0, Target::to0}}}}, stay{{{}}};
  CHECK(o.contains(go, stay));
  CHECK_FALSE(o.contains(stay, stay));
  CHECK_FALSE(o.contains(stay, go));
  CHECK(o.contains(go, go));
  CHECK(o.single_agent_value == doctest::Approx(0.6));

  SolverConfig cfg;
  const auto g = best_response_iteration(bundle_for(cs), cs, spec, cfg);
  CHECK(g.outcome.converged);
  CHECK(g.outcome.certificate == Certificate::certified);
  CHECK(o.contains(g.outcome.strategy_A, g.outcome.strategy_B));
  CHECK(g.outcome.A.j.mean == doctest::Approx(0.6));
  CHECK(g.outcome.B.j.mean == doctest::Approx(0.7));
}

TEST_CASE("zero costs: every pair is an equilibrium") {
  const CostSurfaces cs = blank_costs(2, 2);
  GameSpec spec;
  spec.M = 1;
  const OracleResult o = brute_force_oracle(cs, spec, 100000);
  for (const auto& p : o.paths) CHECK(p.neps.size() == p.SA.size() * p.SB.size());
}

TEST_CASE("oracle refuses oversized instances") {
  const CostSurfaces cs = blank_costs(2, 12);
  GameSpec spec;
  spec.M = 4;
  CHECK_THROWS_AS(brute_force_oracle(cs, spec, 1000), std::length_error);
}

TEST_CASE("symmetric tiny instances agree with the oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    const CostSurfaces cs = random_costs(rng, 4, 3, true);
    GameSpec spec;
    spec.M = 2;
    SolverConfig cfg;
    const auto sym = solve_symmetric(bundle_for(cs), cs, spec, cfg);
    const OracleResult o = brute_force_oracle(cs, spec, 100000);
    CHECK(std::abs(sym.value.mean - o.single_agent_value) <= 1e-12);
    CHECK(std::abs(sym.backward_value - o.single_agent_value) <= 1e-12);
    CHECK(o.contains(sym.strategy, sym.strategy));
    const auto rep = reflection_residuals(sym.backward.surface, cs, 0.0);
    CHECK(rep.regime[0].max_violation == 0.0);
    CHECK(rep.regime[1].max_violation == 0.0);
    CHECK(rep.regime[0].complementarity == 0.0);
    CHECK(rep.regime[1].complementarity == 0.0);
    CHECK(rep.budget_monotonicity == 0.0);
  }
}

TEST_CASE("symmetric solve rejects asymmetric costs") {
  std::mt19937_64 rng(3);
  CostSurfaces cs = random_costs(rng, 3, 2, true);
  cs.setup.player[0].delta = 0.5;
  cs.setup.player[1].c_to0 = {0.9};
  GameSpec spec;
  spec.M = 1;
  CHECK_THROWS_AS(solve_symmetric(bundle_for(cs), cs, spec, SolverConfig{}), ConfigError);
}

TEST_CASE("forced switches follow the opponent") {
  // B always elects at step 0; A cannot stop the flip.
  CostSurfaces cs = blank_costs(1, 2, 0.1);
  cs.G[0][0][0] = 3.0;
  GameSpec spec;
  spec.M = 1;
  PolicyTable b(1, 2, 1);
  b.set(0, 0, 1, 1, true);
  const auto r = backward_induction(Player::A, b, bundle_for(cs), cs, spec, SolverConfig{});
  CHECK(r.surface.forced[r.surface.bidx(0, 0, 1)] == 1);
  CHECK(r.surface.v(0, 0, 1, 1) == doctest::Approx(3.1));
}

TEST_CASE("cycle or certification on asymmetric tiny games") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 8; ++t) {
    const CostSurfaces cs = random_costs(rng, 3, 3, false);
    GameSpec spec;
    spec.M = 2;
    SolverConfig cfg;
    const auto g = best_response_iteration(bundle_for(cs), cs, spec, cfg);
    const OracleResult o = brute_force_oracle(cs, spec, 100000);
    if (g.outcome.certificate == Certificate::certified) {
      CHECK(o.contains(g.outcome.strategy_A, g.outcome.strategy_B));
    }
    if (o.nep_set_empty) CHECK(g.outcome.certificate != Certificate::certified);
  }
}

// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "game_engine.hpp"
#include "tiny.hpp"

using namespace csg;
using csg::testing::blank_costs;

namespace {

SwitchingStrategy one_path(PathEvents ev) { return SwitchingStrategy{{std::move(ev)}}; }
const SwitchingStrategy kNone = one_path({});

}  // namespace

TEST_CASE("compose: no switches keeps the initial regime") {
  GameSpec spec;
  spec.M = 2;
  const auto jp = compose_regimes(kNone, kNone, {5}, 5, spec);
  for (int k = 0; k <= 5; ++k) CHECK(jp.z(0, k) == 1);
  CHECK(jp.switches(0) == 0);
}

TEST_CASE("compose: a single switch by A") {
  GameSpec spec;
  spec.M = 2;
  const auto jp = compose_regimes(one_path({{3, Target::to0}}), kNone, {5}, 5, spec);
  for (int k = 0; k <= 5; ++k) CHECK(jp.z(0, k) == (k < 3 ? 1 : 0));
  CHECK(jp.changed_by(0, 3) == 1);
  CHECK(jp.realized(Player::A).paths[0] == PathEvents{{3, Target::to0}});
  CHECK(jp.realized(Player::B).paths[0].empty());
}

TEST_CASE("compose: simultaneous switches give one flip charged to both") {
  GameSpec spec;
  spec.M = 2;
  const auto jp = compose_regimes(one_path({{3, Target::to0}}), one_path({{3, Target::flip}}), {5}, 5, spec);
  CHECK(jp.z(0, 3) == 0);
  CHECK(jp.z(0, 5) == 0);
  CHECK(jp.changed_by(0, 3) == 3);
  CHECK(jp.switches(0) == 1);

  CostSurfaces cs = blank_costs(1, 5, 0.02);
  cs.setup.player[1].c_to0 = {0.03};
  CHECK(path_payoff(Player::A, jp, cs, 0) == doctest::Approx(0.02));
  CHECK(path_payoff(Player::B, jp, cs, 0) == doctest::Approx(0.03));
}

TEST_CASE("compose: the budget is shared") {
  GameSpec spec;
  spec.M = 1;
  const auto jp = compose_regimes(one_path({{1, Target::flip}}), one_path({{2, Target::flip}}), {4}, 4, spec, false);
  CHECK(jp.switches(0) == 1);
  CHECK(jp.z(0, 4) == 0);
  CHECK_THROWS_AS(compose_regimes(one_path({{1, Target::flip}}), one_path({{2, Target::flip}}), {4}, 4, spec),
                  std::invalid_argument);
}

TEST_CASE("compose: strict mode rejects malformed lists") {
  GameSpec spec;
  spec.M = 3;
  CHECK_THROWS(compose_regimes(one_path({{3, Target::to0}, {1, Target::to1}}), kNone, {5}, 5, spec));
  CHECK_THROWS(compose_regimes(one_path({{7, Target::to0}}), kNone, {5}, 5, spec));
  CHECK_THROWS(compose_regimes(one_path({{2, Target::to1}}), kNone, {5}, 5, spec));
  CHECK_NOTHROW(compose_regimes(one_path({{2, Target::to1}}), kNone, {5}, 5, spec, false));
  spec.alternating = true;
  CHECK_THROWS(compose_regimes(one_path({{1, Target::to0}}), kNone, {5}, 5, spec));
  CHECK_NOTHROW(compose_regimes(kNone, one_path({{1, Target::to0}}), {5}, 5, spec));
}

TEST_CASE("compose: events at or after the end step are ignored in lenient mode") {
  GameSpec spec;
  spec.M = 2;
  const auto jp = compose_regimes(one_path({{3, Target::to0}}), kNone, {2}, 5, spec, false);
  CHECK(jp.switches(0) == 0);
}

TEST_CASE("policy tables and open-loop strategies agree") {
  GameSpec spec;
  spec.M = 2;
  const SwitchingStrategy s = one_path({{1, Target::to0}, {3, Target::to1}});
  const PolicyTable t = open_loop_table(s, 5, 2);
  const auto a = compose_regimes(t, PolicyTable(1, 5, 2), {5}, spec);
  const auto b = compose_regimes(s, kNone, {5}, 5, spec);
  CHECK(a == b);
}

TEST_CASE("payoff by direct quadrature") {
  CostSurfaces cs = blank_costs(2, 4, 0.1);
  for (int p = 0; p < 2; ++p) {
    for (int k = 0; k < 4; ++k) {
      cs.F[0][1][cs.cell(p, k)] = 0.3 * (k + 1) + p;
      cs.F[0][0][cs.cell(p, k)] = 0.7;
    }
    cs.G[0][1][static_cast<std::size_t>(p)] = 2.0;
    cs.G[0][0][static_cast<std::size_t>(p)] = 5.0;
  }
  cs.bank = {1.0, 1.1, 1.2, 1.3, 1.4};
  GameSpec spec;
  spec.M = 1;
  SwitchingStrategy a{{{}, {{2, Target::to0}}}};
  SwitchingStrategy none{{{}, {}}};
  const auto jp = compose_regimes(a, none, cs.end_step, 4, spec);
  const double j0 = (1.0 * 0.3 + 1.1 * 0.6 + 1.2 * 0.9 + 1.3 * 1.2) * 0.25 + 2.0;
  const double j1 = (1.0 * 1.3 + 1.1 * 1.6) * 0.25 + 0.1 / 1.2 + (1.2 * 0.7 + 1.3 * 0.7) * 0.25 + 5.0;
  CHECK(path_payoff(Player::A, jp, cs, 0) == doctest::Approx(j0).epsilon(1e-14));
  CHECK(path_payoff(Player::A, jp, cs, 1) == doctest::Approx(j1).epsilon(1e-14));
  const auto e = evaluate_payoff(Player::A, jp, cs);
  CHECK(e.mean == doctest::Approx(0.5 * (j0 + j1)));
  CHECK(e.se == doctest::Approx(std::abs(j0 - j1) / 2.0));
  // Zero costs, zero payoff.
  CHECK(evaluate_payoff(Player::B, jp, blank_costs(2, 4)).mean == 0.0);
}

TEST_CASE("symmetric costs and the same strategy give equal payoffs") {
  std::mt19937_64 rng(9);
  const CostSurfaces cs = csg::testing::random_costs(rng, 5, 4, true);
  GameSpec spec;
  spec.M = 2;
  SwitchingStrategy s{std::vector<PathEvents>(5, PathEvents{{1, Target::to0}})};
  const auto jp = compose_regimes(s, s, cs.end_step, 4, spec, false);
  CHECK(evaluate_payoff(Player::A, jp, cs).mean == evaluate_payoff(Player::B, jp, cs).mean);
}

TEST_CASE("strategy enumeration") {
  CHECK(count_path_strategies(1, 1) == 3);
  CHECK(enumerate_path_strategies({0}, 1).size() == 3);
  CHECK(count_path_strategies(3, 2) == static_cast<long long>(enumerate_path_strategies({0, 1, 2}, 2).size()));
}

TEST_CASE("certification") {
  GameSpec spec;
  spec.M = 1;
  CertifyOptions o;
  o.exact = true;

  {
    const CostSurfaces zero = blank_costs(3, 2);
    SwitchingStrategy a{{{{0, Target::to0}}, {}, {}}};
    SwitchingStrategy none{{{}, {}, {}}};
    const auto out = certify_nep(a, none, zero, spec, o);
    CHECK(out.certificate == Certificate::certified);
  }
  {
    // Regime 0 is expensive for A: staying is the only equilibrium.
    CostSurfaces cs = blank_costs(1, 2, 0.1);
    cs.G[0][0][0] = 1.0;
    const auto stay = certify_nep(kNone, kNone, cs, spec, o);
    CHECK(stay.certificate == Certificate::certified);
    CHECK(detect_banal(stay));
    const auto go = certify_nep(one_path({{0, Target::to0}}), kNone, cs, spec, o);
    CHECK(go.certificate == Certificate::refuted);
    CHECK(go.A.margin < 0.0);
  }
}

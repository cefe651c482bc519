// SPDX-License-Identifier: Apache-2.0
//
// Backward induction for one player against a fixed opponent policy,
// best-response iteration, the single-agent reduction of the symmetric game,
// an exhaustive oracle for tiny instances and the reflection report.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "game_engine.hpp"
#include "regression.hpp"

namespace csg {

struct SolverConfig {
  int degree = 2;
  int br_max_iters = 20;
  double br_tol = 0.0;  // > 0 also stops when both payoffs move less than this
  long long exhaustive_bound = 4096;
  int exact_paths_max = 8;  // at or below this many paths, condition pathwise
  Conditioning conditioning = Conditioning::regression;
  double reflection_tol = 1e-8;
  double banal_eps = 0.0;
  CertifyOptions certify;
  int threads = 1;

  bool exact(int n_paths) const { return n_paths <= exact_paths_max; }
  std::vector<std::string> diagnostics() const;
};

// Values V(p, k, z, l) on every path and grid step, plus the two branches of
// the min at the top budget level.
struct RegimeValueSurface {
  Player player = Player::A;
  int n_paths = 0;
  int n_steps = 0;
  int M = 0;
  Conditioning conditioning = Conditioning::regression;
  std::vector<double> V;
  // Pathwise value of following the decisions to the end; regression
  // targets are built from these. Equal to V under pathwise conditioning.
  std::vector<double> realized;
  // Per (p, k, z) at l = M for k below the path's end step.
  std::vector<double> no_switch;      // running cost + continuation in z
  std::vector<double> switch_branch;  // switching cost + continuation in the other regime; inf if unavailable
  std::vector<double> dK;             // no_switch - V where the player chose
  std::vector<std::uint8_t> forced;   // opponent switched, the min was not taken
  // One fit per step, columns ordered (z, l) with l fastest.
  std::vector<RegressionFit> fits;
  int regression_fallbacks = 0;

  std::size_t vidx(int p, int k, int z, int l) const {
    return ((static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k)) * 2u +
            static_cast<std::size_t>(z)) *
               static_cast<std::size_t>(M + 1) +
           static_cast<std::size_t>(l);
  }
  std::size_t bidx(int p, int k, int z) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k)) * 2u +
           static_cast<std::size_t>(z);
  }
  double v(int p, int k, int z, int l) const { return V[vidx(p, k, z, l)]; }
  // Backward estimates of the value at time 0, from the fitted min and from
  // the realized pathwise values.
  double value0(int z0) const;
  double realized0(int z0) const;
};

struct BackwardResult {
  RegimeValueSurface surface;
  PolicyTable policy;
};

BackwardResult backward_induction(Player i, const PolicyTable& opponent, const PathBundle& bundle,
                                  const CostSurfaces& costs, const GameSpec& spec, const SolverConfig& cfg);

// Policy that never elects.
PolicyTable never_switch(int n_paths, int n_steps, int M);

using CostRebuild = std::function<CostSurfaces(const DeltaField&)>;

struct GameResult {
  GameOutcome outcome;
  BackwardResult A, B;
  CostSurfaces costs;  // final surfaces (they move in response mode)
  bool banal = false;
};

// Gauss-Seidel best responses starting from a never-switching B; certifies
// the fixed point when one is reached. Response-mode deltas need `rebuild`.
GameResult best_response_iteration(const PathBundle& bundle, const CostSurfaces& costs, const GameSpec& spec,
                                   const SolverConfig& cfg, const CostRebuild& rebuild = {});

struct SingleAgentResult {
  BackwardResult backward;
  JointRegimePath path;
  SwitchingStrategy strategy;
  PayoffEstimate value;  // forward evaluation of the optimal policy
  double backward_value = 0.0;
};

// Optimal switching of player i alone (opponent never switches).
SingleAgentResult solve_single_agent(Player i, const PathBundle& bundle, const CostSurfaces& costs,
                                     const GameSpec& spec, const SolverConfig& cfg);

// Checks the symmetric-game hypotheses (ConfigError listing every violation)
// and solves the single-agent problem, whose value both players attain.
SingleAgentResult solve_symmetric(const PathBundle& bundle, const CostSurfaces& costs, const GameSpec& spec,
                                  const SolverConfig& cfg);

// Exhaustive game on a tiny instance: every path is an equally likely atom,
// so strategies and equilibria decompose path by path.
struct OraclePath {
  std::vector<PathEvents> SA, SB;
  std::vector<double> JA, JB;  // |SA| x |SB|, row-major in A
  std::vector<std::pair<int, int>> neps;
  int best_single = 0;  // A's best index against B never switching
};

struct OracleResult {
  std::vector<OraclePath> paths;
  double single_agent_value = 0.0;
  long long pairs = 0;
  bool nep_set_empty = false;
  double tol = 0.0;

  // Whether the pair is a Nash equilibrium path by path.
  bool contains(const SwitchingStrategy& a, const SwitchingStrategy& b) const;
  const CostSurfaces* costs = nullptr;
  GameSpec spec;
};

double oracle_path_payoff(Player i, int p, const PathEvents& a, const PathEvents& b, const CostSurfaces& costs,
                          const GameSpec& spec);

OracleResult brute_force_oracle(const CostSurfaces& costs, const GameSpec& spec, long long bound);

struct RegimeReflection {
  double max_violation = 0.0;      // max(0, V - switch branch)
  double complementarity = 0.0;    // sum |(switch branch - V) dK|
  double min_dK = 0.0;
  double total_K = 0.0;
  double value_obstacle_violation = 0.0;  // max(0, V^{z,M} - V^{other,M-1} - c)
  int nodes = 0;
  int forced_nodes = 0;
};

struct ReflectionReport {
  Player player = Player::A;
  RegimeReflection regime[2];
  double budget_monotonicity = 0.0;  // max(0, V^l - V^{l-1})
  double scale = 0.0;
  double tol = 0.0;
  bool pass = false;
};

ReflectionReport reflection_residuals(const RegimeValueSurface& s, const CostSurfaces& costs, double tol);

}  // namespace csg

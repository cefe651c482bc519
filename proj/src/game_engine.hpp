// SPDX-License-Identifier: Apache-2.0
//
// Strategies, joint regime paths, payoffs and Nash-equilibrium certification
// for the switching game.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "costs.hpp"

namespace csg {

struct GameSpec {
  int M = 1;                 // joint budget of regime changes
  int z0 = 1;                // initial regime (1 = no collateral)
  bool alternating = false;  // A may act on even steps only, B on odd steps

  bool may_act(Player i, int k) const {
    return !alternating || (k % 2 == 0) == (i == Player::A);
  }
};

// Feedback strategy: whether the player elects to switch at (path, step,
// prevailing regime, switches left).
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(int n_paths, int n_steps, int M)
      : n_paths_(n_paths), n_steps_(n_steps), M_(M),
        data_(static_cast<std::size_t>(n_paths) * static_cast<std::size_t>(n_steps) * 2u *
                  static_cast<std::size_t>(M + 1),
              0) {}

  int n_paths() const { return n_paths_; }
  int n_steps() const { return n_steps_; }
  int M() const { return M_; }
  bool elect(int p, int k, int z, int l) const { return k < n_steps_ && data_[at(p, k, z, l)] != 0; }
  void set(int p, int k, int z, int l, bool v) { data_[at(p, k, z, l)] = v ? 1 : 0; }
  bool operator==(const PolicyTable&) const = default;

 private:
  std::size_t at(int p, int k, int z, int l) const {
    return ((static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps_) + static_cast<std::size_t>(k)) * 2u +
            static_cast<std::size_t>(z)) *
               static_cast<std::size_t>(M_ + 1) +
           static_cast<std::size_t>(l);
  }
  int n_paths_ = 0, n_steps_ = 0, M_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class Target : std::uint8_t { to0 = 0, to1 = 1, flip = 2 };
const char* to_string(Target t);

struct SwitchEvent {
  int step = 0;
  Target target = Target::flip;
  bool operator==(const SwitchEvent&) const = default;
};

using PathEvents = std::vector<SwitchEvent>;

// Open-loop strategy: one sorted event list per path. An event is effective
// when its target differs from the prevailing regime and budget remains.
struct SwitchingStrategy {
  std::vector<PathEvents> paths;
  bool operator==(const SwitchingStrategy&) const = default;
  int total_events() const;
};

// Policy that elects exactly at the strategy's effective events.
PolicyTable open_loop_table(const SwitchingStrategy& s, int n_steps, int M);

// Prevailing regime after the decisions at each step; changes attributed by
// bit mask (1 = A, 2 = B).
struct JointRegimePath {
  int n_paths = 0;
  int n_steps = 0;
  std::vector<std::uint8_t> regime;
  std::vector<std::uint8_t> by;
  std::vector<int> end_step;

  std::size_t cell(int p, int k) const {
    return static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k);
  }
  int z(int p, int k) const { return regime[cell(p, k)]; }
  int changed_by(int p, int k) const { return by[cell(p, k)]; }
  int switches(int p) const;
  // Regime changes elected by player i, with absolute targets.
  SwitchingStrategy realized(Player i) const;
  bool operator==(const JointRegimePath&) const = default;
};

JointRegimePath compose_regimes(const PolicyTable& a, const PolicyTable& b, const std::vector<int>& end_step,
                                const GameSpec& spec);

// Strict mode rejects unsorted or out-of-range events, lists longer than M,
// and events that would not change the regime; lenient mode skips the
// latter.
JointRegimePath compose_regimes(const SwitchingStrategy& a, const SwitchingStrategy& b,
                                const std::vector<int>& end_step, int n_steps, const GameSpec& spec,
                                bool strict = true);

struct PayoffEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> per_path;
};

// Discounted running costs by left-point quadrature, every regime change
// charged to the player at its own switching cost, terminal cost at T ^ tau.
double path_payoff(Player i, const JointRegimePath& path, const CostSurfaces& costs, int p);
PayoffEstimate evaluate_payoff(Player i, const JointRegimePath& path, const CostSurfaces& costs, int threads = 1);

// Mean and standard error of a sample.
PayoffEstimate summarize(std::vector<double> values);

// Every event list on one path with at most M events at the given decision
// steps, targets 0 or 1.
std::vector<PathEvents> enumerate_path_strategies(const std::vector<int>& steps, int M);
long long count_path_strategies(int n_decision_steps, int M);

enum class Certificate { certified, refuted, inconclusive };
const char* to_string(Certificate c);

struct CertifyOptions {
  bool exact = false;          // paths are equally likely atoms with full information
  double abs_tol = 1e-10;      // relative to 1 + payoff scale
  double z = 2.0;              // standard errors tolerated before refusing to certify
  double refute_z = 3.0;
  int random_mutations = 16;
  std::uint64_t seed = 7;
  long long exhaustive_bound = 4096;
  int threads = 1;
};

struct PlayerCheck {
  PayoffEstimate j;
  double margin = 0.0;     // min over deviations of J(deviation) - J(candidate)
  double margin_se = 0.0;  // paired standard error of that difference
  std::string worst;       // label of the best deviation
  int n_deviations = 0;
};

struct GameOutcome {
  SwitchingStrategy strategy_A, strategy_B;
  JointRegimePath path;
  PlayerCheck A, B;
  Certificate certificate = Certificate::inconclusive;
  int iterations = 0;
  bool converged = false;
  bool cycle = false;
  std::string note;
  std::vector<std::string> trace;
};

// Best response of player i to an opponent policy, provided by the solver.
using BestResponseFn = std::function<PolicyTable(Player, const PolicyTable&)>;

GameOutcome certify_nep(const SwitchingStrategy& a, const SwitchingStrategy& b, const CostSurfaces& costs,
                        const GameSpec& spec, const CertifyOptions& opts, const BestResponseFn& best_response = {});

// True when both strategies are empty on at least (1 - eps) of the paths.
bool detect_banal(const GameOutcome& outcome, double eps = 0.0);

}  // namespace csg

// SPDX-License-Identifier: Apache-2.0

#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace csg {

std::vector<std::string> SolverConfig::diagnostics() const {
  std::vector<std::string> out;
  if (degree < 0) out.emplace_back("solver.degree must be >= 0");
  if (br_max_iters < 1) out.emplace_back("solver.br_max_iters must be >= 1");
  if (!(br_tol >= 0.0)) out.emplace_back("solver.br_tol must be >= 0");
  if (exhaustive_bound < 1) out.emplace_back("solver.exhaustive_bound must be >= 1");
  if (exact_paths_max < 0) out.emplace_back("solver.exact_paths_max must be >= 0");
  if (!(reflection_tol >= 0.0)) out.emplace_back("solver.reflection_tol must be >= 0");
  if (!(banal_eps >= 0.0 && banal_eps <= 1.0)) out.emplace_back("solver.banal_eps must lie in [0, 1]");
  if (threads < 1) out.emplace_back("engine.threads must be >= 1");
  return out;
}

double RegimeValueSurface::value0(int z0) const {
  if (n_paths == 0) return 0.0;
  double s = 0.0;
  for (int p = 0; p < n_paths; ++p) s += v(p, 0, z0, M);
  return s / n_paths;
}

double RegimeValueSurface::realized0(int z0) const {
  if (n_paths == 0) return 0.0;
  double s = 0.0;
  for (int p = 0; p < n_paths; ++p) s += realized[vidx(p, 0, z0, M)];
  return s / n_paths;
}

PolicyTable never_switch(int n_paths, int n_steps, int M) { return PolicyTable(n_paths, n_steps, M); }

BackwardResult backward_induction(Player i, const PolicyTable& opponent, const PathBundle& bundle,
                                  const CostSurfaces& costs, const GameSpec& spec, const SolverConfig& cfg) {
  const int np = costs.n_paths;
  const int n = costs.n_steps;
  const int M = spec.M;
  if (bundle.n_paths() != np || bundle.n_steps() != n)
    throw std::invalid_argument("backward_induction: bundle and cost surfaces differ in shape");
  if (opponent.n_paths() != np || opponent.n_steps() != n || opponent.M() < M)
    throw std::invalid_argument("backward_induction: opponent policy does not match the grid");
  if (M < 1) throw std::invalid_argument("backward_induction: M must be >= 1");

  BackwardResult res;
  RegimeValueSurface& s = res.surface;
  s.player = i;
  s.n_paths = np;
  s.n_steps = n;
  s.M = M;
  s.conditioning = cfg.exact(np) ? Conditioning::pathwise : cfg.conditioning;
  const auto cells = static_cast<std::size_t>(np) * static_cast<std::size_t>(n + 1);
  s.V.assign(cells * 2u * static_cast<std::size_t>(M + 1), 0.0);
  s.realized.assign(s.V.size(), 0.0);
  s.no_switch.assign(cells * 2u, 0.0);
  s.switch_branch.assign(cells * 2u, kNever);
  s.dK.assign(cells * 2u, 0.0);
  s.forced.assign(cells * 2u, 0);
  s.fits.resize(static_cast<std::size_t>(n));
  res.policy = PolicyTable(np, n, M);

  // Terminal data from the end step onwards.
  for (int p = 0; p < np; ++p) {
    for (int k = costs.end(p); k <= n; ++k)
      for (int z = 0; z < 2; ++z)
        for (int l = 0; l <= M; ++l) s.V[s.vidx(p, k, z, l)] = s.realized[s.vidx(p, k, z, l)] = costs.terminal(i, z, p);
  }

  const int cols = 2 * (M + 1);
  std::vector<int> alive;
  for (int k = n - 1; k >= 0; --k) {
    alive.clear();
    for (int p = 0; p < np; ++p)
      if (k < costs.end(p)) alive.push_back(p);
    if (alive.empty()) continue;
    const auto m = static_cast<Eigen::Index>(alive.size());
    Eigen::MatrixXd states(m, 3), targets(m, cols);
    for (Eigen::Index r = 0; r < m; ++r) {
      const int p = alive[static_cast<std::size_t>(r)];
      states(r, 0) = bundle.x(p, k);
      states(r, 1) = bundle.lamA(p, k);
      states(r, 2) = bundle.lamB(p, k);
      for (int z = 0; z < 2; ++z)
        for (int l = 0; l <= M; ++l) targets(r, z * (M + 1) + l) = s.realized[s.vidx(p, k + 1, z, l)];
    }
    RegressionFit& fit = s.fits[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd cont = conditional_expectation(s.conditioning, states, targets, cfg.degree, &fit);
    fit.n_fit = static_cast<int>(m);
    if (s.conditioning == Conditioning::regression && fit.fallback) ++s.regression_fallbacks;

    const double bk = costs.bank[static_cast<std::size_t>(k)];
    const double dt = costs.dt(k);
    const bool own_turn = spec.may_act(i, k);
    const bool opp_turn = spec.may_act(other(i), k);
    parallel_for(static_cast<int>(m), cfg.threads, [&](int rb, int re) {
      for (int r = rb; r < re; ++r) {
        const int p = alive[static_cast<std::size_t>(r)];
        auto H = [&](int z, int l) { return bk * costs.running(i, z, p, k) * dt + cont(r, z * (M + 1) + l); };
        for (int z = 0; z < 2; ++z) {
          for (int l = 0; l <= M; ++l) {
            const double N = H(z, l);
            double S = kNever;
            if (l > 0) S = costs.switching(i, 1 - z, k) + H(1 - z, l - 1);
            const bool forced = l > 0 && opp_turn && opponent.elect(p, k, z, l);
            const bool switched = forced || (l > 0 && own_turn && S < N);
            const double value = switched ? S : N;
            // When forced the player's choice does not matter; it sides with
            // the opponent unless it strictly prefers to stay.
            const bool elect = forced ? own_turn && S <= N : switched;
            s.V[s.vidx(p, k, z, l)] = value;
            s.realized[s.vidx(p, k, z, l)] =
                switched ? costs.switching(i, 1 - z, k) + bk * costs.running(i, 1 - z, p, k) * dt +
                               s.realized[s.vidx(p, k + 1, 1 - z, l - 1)]
                         : bk * costs.running(i, z, p, k) * dt + s.realized[s.vidx(p, k + 1, z, l)];
            if (elect) res.policy.set(p, k, z, l, true);
            if (l == M) {
              const auto b = s.bidx(p, k, z);
              s.no_switch[b] = N;
              s.switch_branch[b] = own_turn || forced ? S : kNever;
              s.forced[b] = forced ? 1 : 0;
              s.dK[b] = forced ? 0.0 : N - value;
            }
          }
        }
      }
    });
  }
  return res;
}

namespace {

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

// State after the decisions at every step, for response-mode deltas.
DeltaField response_deltas(const JointRegimePath& path, const RegimeValueSurface& va, const RegimeValueSurface& vb,
                           const GameSpec& spec) {
  DeltaField d;
  const auto cells = static_cast<std::size_t>(path.n_paths) * static_cast<std::size_t>(path.n_steps + 1);
  for (auto& f : d.for_player) f.assign(cells, 0.0);
  for (int p = 0; p < path.n_paths; ++p) {
    int l = spec.M;
    for (int k = 0; k <= path.n_steps; ++k) {
      if (path.changed_by(p, k)) --l;
      const int z = path.z(p, k);
      const auto c = path.cell(p, k);
      // A's cost reads B's threshold and vice versa.
      d.for_player[0][c] = std::max(0.0, vb.v(p, k, z, l));
      d.for_player[1][c] = std::max(0.0, va.v(p, k, z, l));
    }
  }
  return d;
}

}  // namespace

GameResult best_response_iteration(const PathBundle& bundle, const CostSurfaces& costs_in, const GameSpec& spec,
                                   const SolverConfig& cfg, const CostRebuild& rebuild) {
  if (auto diag = cfg.diagnostics(); !diag.empty()) throw ConfigError(joined(diag));
  const bool response = costs_in.setup.delta_mode == DeltaMode::response;
  if (response && !rebuild) throw std::invalid_argument("response-mode thresholds need a cost rebuild hook");

  GameResult res;
  res.costs = costs_in;
  const int np = costs_in.n_paths;
  const int n = costs_in.n_steps;
  // Each player answers the opponent's realized events held fixed, which is
  // the deviation the equilibrium test considers.
  PolicyTable fixed_b = never_switch(np, n, spec.M);

  struct Iterate {
    SwitchingStrategy a, b;
    double ja = 0.0, jb = 0.0;
  };
  std::vector<Iterate> history;
  JointRegimePath path;
  bool converged = false, cycle = false;
  int it = 0;
  std::vector<std::string> trace;
  for (it = 1; it <= cfg.br_max_iters; ++it) {
    res.A = backward_induction(Player::A, fixed_b, bundle, res.costs, spec, cfg);
    const PolicyTable fixed_a =
        open_loop_table(compose_regimes(res.A.policy, fixed_b, res.costs.end_step, spec).realized(Player::A), n, spec.M);
    res.B = backward_induction(Player::B, fixed_a, bundle, res.costs, spec, cfg);
    path = compose_regimes(fixed_a, res.B.policy, res.costs.end_step, spec);
    fixed_b = open_loop_table(path.realized(Player::B), n, spec.M);
    Iterate cur{path.realized(Player::A), path.realized(Player::B),
                evaluate_payoff(Player::A, path, res.costs, cfg.threads).mean,
                evaluate_payoff(Player::B, path, res.costs, cfg.threads).mean};
    {
      std::ostringstream os;
      os << "iteration " << it << ": switches A " << cur.a.total_events() << ", B " << cur.b.total_events()
         << ", J_A " << cur.ja << ", J_B " << cur.jb;
      trace.push_back(os.str());
    }
    if (!history.empty()) {
      const Iterate& prev = history.back();
      if (cur.a == prev.a && cur.b == prev.b) converged = true;
      else if (cfg.br_tol > 0.0 && std::abs(cur.ja - prev.ja) <= cfg.br_tol && std::abs(cur.jb - prev.jb) <= cfg.br_tol)
        converged = true;
      for (std::size_t h = 0; !converged && h + 1 < history.size(); ++h) {
        if (history[h].a == cur.a && history[h].b == cur.b) {
          cycle = true;
          std::ostringstream os;
          os << "war-type cycle: iteration " << it << " repeats iteration " << h + 1 << " (period "
             << history.size() - h << ")";
          trace.push_back(os.str());
          break;
        }
      }
    }
    history.push_back(std::move(cur));
    if (converged || cycle) break;
    if (response) res.costs = rebuild(response_deltas(path, res.A.surface, res.B.surface, spec));
  }
  if (it > cfg.br_max_iters) it = cfg.br_max_iters;

  const Iterate& last = history.back();
  const PathBundle* bptr = &bundle;
  const CostSurfaces* cptr = &res.costs;
  BestResponseFn br = [bptr, cptr, spec, cfg](Player who, const PolicyTable& opp) {
    return backward_induction(who, opp, *bptr, *cptr, spec, cfg).policy;
  };
  if (converged) {
    CertifyOptions opts = cfg.certify;
    opts.exact = cfg.exact(np);
    opts.threads = cfg.threads;
    opts.exhaustive_bound = cfg.exhaustive_bound;
    res.outcome = certify_nep(last.a, last.b, res.costs, spec, opts, br);
  } else {
    res.outcome.strategy_A = last.a;
    res.outcome.strategy_B = last.b;
    res.outcome.path = path;
    res.outcome.A.j = evaluate_payoff(Player::A, path, res.costs, cfg.threads);
    res.outcome.B.j = evaluate_payoff(Player::B, path, res.costs, cfg.threads);
    res.outcome.certificate = Certificate::inconclusive;
  }
  res.outcome.iterations = it;
  res.outcome.converged = converged;
  res.outcome.cycle = cycle;
  res.outcome.note = converged ? "converged" : cycle ? "war-type cycle" : "iteration cap reached";
  trace.insert(trace.end(), res.outcome.trace.begin(), res.outcome.trace.end());
  res.outcome.trace = std::move(trace);
  res.banal = detect_banal(res.outcome, cfg.banal_eps);
  return res;
}

SingleAgentResult solve_single_agent(Player i, const PathBundle& bundle, const CostSurfaces& costs,
                                     const GameSpec& spec, const SolverConfig& cfg) {
  SingleAgentResult r;
  const PolicyTable none = never_switch(costs.n_paths, costs.n_steps, spec.M);
  r.backward = backward_induction(i, none, bundle, costs, spec, cfg);
  r.path = i == Player::A ? compose_regimes(r.backward.policy, none, costs.end_step, spec)
                          : compose_regimes(none, r.backward.policy, costs.end_step, spec);
  r.strategy = r.path.realized(i);
  r.value = evaluate_payoff(i, r.path, costs, cfg.threads);
  r.backward_value = r.backward.surface.realized0(spec.z0);
  return r;
}

SingleAgentResult solve_symmetric(const PathBundle& bundle, const CostSurfaces& costs, const GameSpec& spec,
                                  const SolverConfig& cfg) {
  auto diag = symmetry_diagnostics(costs.setup, costs.n_steps);
  if (spec.alternating) diag.emplace_back("symmetric: alternating decision dates break the symmetry");
  if (!diag.empty()) throw ConfigError(joined(diag));
  return solve_single_agent(Player::A, bundle, costs, spec, cfg);
}

double oracle_path_payoff(Player i, int p, const PathEvents& a, const PathEvents& b, const CostSurfaces& costs,
                          const GameSpec& spec) {
  // Step -> requested regime (2 = flip) for each player.
  std::map<int, int> want[2];
  for (const auto& e : a) want[0].emplace(e.step, static_cast<int>(e.target));
  for (const auto& e : b) want[1].emplace(e.step, static_cast<int>(e.target));
  const int end = costs.end(p);
  int regime = spec.z0, left = spec.M;
  double total = 0.0;
  for (int k = 0; k < end; ++k) {
    bool change = false;
    for (int who = 0; who < 2; ++who) {
      const auto it = want[who].find(k);
      if (it == want[who].end() || !spec.may_act(static_cast<Player>(who), k)) continue;
      if (it->second == 2 || it->second != regime) change = true;
    }
    if (change && left > 0) {
      regime = 1 - regime;
      --left;
      total += costs.setup.of(i).c(regime, k) / costs.bank[static_cast<std::size_t>(k)];
    }
    total += costs.bank[static_cast<std::size_t>(k)] * costs.dt(k) * costs.running(i, regime, p, k);
  }
  return total + costs.terminal(i, regime, p);
}

bool OracleResult::contains(const SwitchingStrategy& a, const SwitchingStrategy& b) const {
  if (!costs || a.paths.size() != paths.size() || b.paths.size() != paths.size()) return false;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& op = paths[p];
    const int pi = static_cast<int>(p);
    const double ja = oracle_path_payoff(Player::A, pi, a.paths[p], b.paths[p], *costs, spec);
    const double jb = oracle_path_payoff(Player::B, pi, a.paths[p], b.paths[p], *costs, spec);
    for (const auto& s : op.SA)
      if (oracle_path_payoff(Player::A, pi, s, b.paths[p], *costs, spec) < ja - tol) return false;
    for (const auto& s : op.SB)
      if (oracle_path_payoff(Player::B, pi, a.paths[p], s, *costs, spec) < jb - tol) return false;
  }
  return true;
}

OracleResult brute_force_oracle(const CostSurfaces& costs, const GameSpec& spec, long long bound) {
  OracleResult res;
  res.costs = &costs;
  res.spec = spec;
  const int np = costs.n_paths;
  res.paths.resize(static_cast<std::size_t>(np));
  double scale = 0.0;
  for (int p = 0; p < np; ++p) {
    OraclePath& op = res.paths[static_cast<std::size_t>(p)];
    std::vector<int> sa, sb;
    for (int k = 0; k < costs.end(p); ++k) {
      if (spec.may_act(Player::A, k)) sa.push_back(k);
      if (spec.may_act(Player::B, k)) sb.push_back(k);
    }
    const long long pairs = count_path_strategies(static_cast<int>(sa.size()), spec.M) *
                            count_path_strategies(static_cast<int>(sb.size()), spec.M);
    if (pairs > bound) {
      std::ostringstream os;
      os << "oracle: " << pairs << " strategy pairs on path " << p << " exceed the exhaustive bound " << bound;
      throw std::length_error(os.str());
    }
    res.pairs += pairs;
    op.SA = enumerate_path_strategies(sa, spec.M);
    op.SB = enumerate_path_strategies(sb, spec.M);
    const std::size_t na = op.SA.size(), nb = op.SB.size();
    op.JA.resize(na * nb);
    op.JB.resize(na * nb);
    for (std::size_t x = 0; x < na; ++x) {
      for (std::size_t y = 0; y < nb; ++y) {
        op.JA[x * nb + y] = oracle_path_payoff(Player::A, p, op.SA[x], op.SB[y], costs, spec);
        op.JB[x * nb + y] = oracle_path_payoff(Player::B, p, op.SA[x], op.SB[y], costs, spec);
        scale = std::max({scale, std::abs(op.JA[x * nb + y]), std::abs(op.JB[x * nb + y])});
      }
    }
  }
  res.tol = 1e-12 * (1.0 + scale);
  res.nep_set_empty = false;
  double single = 0.0;
  for (auto& op : res.paths) {
    const std::size_t na = op.SA.size(), nb = op.SB.size();
    std::vector<double> best_a(nb, kNever), best_b(na, kNever);
    for (std::size_t x = 0; x < na; ++x)
      for (std::size_t y = 0; y < nb; ++y) {
        best_a[y] = std::min(best_a[y], op.JA[x * nb + y]);
        best_b[x] = std::min(best_b[x], op.JB[x * nb + y]);
      }
    for (std::size_t x = 0; x < na; ++x)
      for (std::size_t y = 0; y < nb; ++y)
        if (op.JA[x * nb + y] <= best_a[y] + res.tol && op.JB[x * nb + y] <= best_b[x] + res.tol)
          op.neps.emplace_back(static_cast<int>(x), static_cast<int>(y));
    if (op.neps.empty()) res.nep_set_empty = true;
    // Index 0 of SB is the empty strategy.
    for (std::size_t x = 0; x < na; ++x)
      if (op.JA[x * nb] < op.JA[static_cast<std::size_t>(op.best_single) * nb]) op.best_single = static_cast<int>(x);
    single += op.JA[static_cast<std::size_t>(op.best_single) * nb];
  }
  res.single_agent_value = np > 0 ? single / np : 0.0;
  return res;
}

ReflectionReport reflection_residuals(const RegimeValueSurface& s, const CostSurfaces& costs, double tol) {
  ReflectionReport rep;
  rep.player = s.player;
  for (int p = 0; p < s.n_paths; ++p) {
    const int end = costs.end(p);
    for (int k = 0; k < end; ++k) {
      for (int z = 0; z < 2; ++z) {
        RegimeReflection& r = rep.regime[z];
        const auto b = s.bidx(p, k, z);
        const double v = s.v(p, k, z, s.M);
        rep.scale = std::max(rep.scale, std::abs(v));
        ++r.nodes;
        if (s.forced[b]) {
          ++r.forced_nodes;
          continue;
        }
        const double S = s.switch_branch[b];
        if (std::isfinite(S)) {
          r.max_violation = std::max(r.max_violation, v - S);
          r.complementarity += std::abs((S - v) * s.dK[b]);
        }
        r.min_dK = std::min(r.min_dK, s.dK[b]);
        r.total_K += s.dK[b];
        const double obstacle = s.v(p, k, 1 - z, s.M - 1) + costs.switching(s.player, 1 - z, k);
        r.value_obstacle_violation = std::max(r.value_obstacle_violation, v - obstacle);
        for (int l = 1; l <= s.M; ++l)
          rep.budget_monotonicity = std::max(rep.budget_monotonicity, s.v(p, k, z, l) - s.v(p, k, z, l - 1));
      }
    }
  }
  rep.tol = tol * (1.0 + rep.scale);
  rep.pass = true;
  for (const auto& r : rep.regime)
    if (r.max_violation > rep.tol || r.complementarity > rep.tol || r.min_dK < -rep.tol) rep.pass = false;
  return rep;
}

}  // namespace csg

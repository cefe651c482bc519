// SPDX-License-Identifier: Apache-2.0

#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace csg {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& run_modes() {
  static const std::vector<std::string> modes = {"simulate", "value", "game", "symmetric", "oracle", "residuals"};
  return modes;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Writer {
 public:
  Writer(fs::path dir, RunResult& res) : dir_(std::move(dir)), res_(res) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
  }

  void text(const std::string& name, const std::string& body) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    f.close();
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    res_.files.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
  RunResult& res_;
};

void write_manifest(Writer& w, const RunConfig& cfg, const std::string& mode) {
  std::ostringstream os;
  os << "# csagame " << CSAGAME_VERSION << "\n";
  os << "# seed " << cfg.model.seed << "\n";
  os << "# mode " << mode << "\n";
  os << "# re-run with: csagame --config manifest.txt --mode " << mode << "\n";
  os << cfg.resolved.dump(2) << "\n";
  w.text("manifest.txt", os.str());
}

void write_paths(Writer& w, const PathBundle& b) {
  std::ostringstream os;
  os << "path,step,time,x,lambdaA,lambdaB,bank\n";
  for (int p = 0; p < b.n_paths(); ++p)
    for (int k = 0; k <= b.n_steps(); ++k)
      os << p << ',' << k << ',' << num(b.t(k)) << ',' << num(b.x(p, k)) << ',' << num(b.lamA(p, k)) << ','
         << num(b.lamB(p, k)) << ',' << num(b.bank(k)) << '\n';
  w.text("paths.csv", os.str());

  std::ostringstream d;
  d << "path,tauA,tauB,tau,first,default_step\n";
  for (int p = 0; p < b.n_paths(); ++p) {
    const char* first = !b.defaulted(p) ? "none" : b.first_to_default(Player::A, p) ? "A" : "B";
    d << p << ',' << num(b.tauA(p)) << ',' << num(b.tauB(p)) << ',' << num(b.tau(p)) << ',' << first << ','
      << b.default_step(p) << '\n';
  }
  w.text("defaults.csv", d.str());
}

void write_exposure(Writer& w, const PathBundle& b, const ExposureSurface& e) {
  std::ostringstream os;
  os << "path,step,time,S_rf,S,cva,dva,bcva,coll\n";
  for (int p = 0; p < e.n_paths; ++p)
    for (int k = 0; k <= e.n_steps; ++k) {
      const auto c = e.at(p, k);
      os << p << ',' << k << ',' << num(b.t(k)) << ',' << num(e.s_rf[c]) << ',' << num(e.s[c]) << ','
         << num(e.cva[c]) << ',' << num(e.dva[c]) << ',' << num(e.bcva[c]) << ',' << num(e.coll[c]) << '\n';
    }
  w.text(std::string("exposure_") + name(e.perspective) + ".csv", os.str());
}

void write_costs(Writer& w, const CostSurfaces& cs) {
  std::ostringstream os, t;
  os << "player,path,step,time,F0,F1\n";
  t << "player,path,end_step,G0,G1\n";
  for (Player i : {Player::A, Player::B}) {
    for (int p = 0; p < cs.n_paths; ++p) {
      for (int k = 0; k < cs.end(p); ++k)
        os << name(i) << ',' << p << ',' << k << ',' << num(cs.grid[static_cast<std::size_t>(k)]) << ','
           << num(cs.running(i, 0, p, k)) << ',' << num(cs.running(i, 1, p, k)) << '\n';
      t << name(i) << ',' << p << ',' << cs.end(p) << ',' << num(cs.terminal(i, 0, p)) << ','
        << num(cs.terminal(i, 1, p)) << '\n';
    }
  }
  w.text("costs.csv", os.str());
  w.text("terminal_costs.csv", t.str());
}

void write_strategies(Writer& w, const SwitchingStrategy& a, const SwitchingStrategy& b, const CostSurfaces& cs) {
  std::ostringstream os;
  os << "player,path,switch_index,step,time,target\n";
  for (Player i : {Player::A, Player::B}) {
    const auto& s = i == Player::A ? a : b;
    for (std::size_t p = 0; p < s.paths.size(); ++p)
      for (std::size_t j = 0; j < s.paths[p].size(); ++j) {
        const auto& e = s.paths[p][j];
        os << name(i) << ',' << p << ',' << j << ',' << e.step << ','
           << num(cs.grid[static_cast<std::size_t>(e.step)]) << ',' << to_string(e.target) << '\n';
      }
  }
  w.text("strategies.csv", os.str());
}

void write_regimes(Writer& w, const JointRegimePath& jp, const CostSurfaces& cs) {
  std::ostringstream os;
  os << "path,step,time,regime,changed,by\n";
  static const char* who[] = {"", "A", "B", "AB"};
  for (int p = 0; p < jp.n_paths; ++p)
    for (int k = 0; k <= jp.n_steps; ++k)
      os << p << ',' << k << ',' << num(cs.grid[static_cast<std::size_t>(k)]) << ',' << jp.z(p, k) << ','
         << (jp.changed_by(p, k) ? 1 : 0) << ',' << who[jp.changed_by(p, k) & 3] << '\n';
  w.text("regimes.csv", os.str());
}

void write_value_surface(Writer& w, const std::vector<const RegimeValueSurface*>& surfaces) {
  std::ostringstream os;
  os << "player,regime,l,step,n_fit,fallback,coefficients\n";
  for (const auto* s : surfaces) {
    for (int k = 0; k < s->n_steps; ++k) {
      const RegressionFit& f = s->fits[static_cast<std::size_t>(k)];
      for (int z = 0; z < 2; ++z)
        for (int l = 0; l <= s->M; ++l) {
          const int col = z * (s->M + 1) + l;
          os << name(s->player) << ',' << z << ',' << l << ',' << k << ',' << f.n_fit << ',' << (f.fallback ? 1 : 0)
             << ',';
          if (s->conditioning == Conditioning::regression && f.coef.cols() > col) {
            for (Eigen::Index r = 0; r < f.coef.rows(); ++r) os << (r ? ";" : "") << num(f.coef(r, col));
          }
          os << '\n';
        }
    }
  }
  w.text("value_surface.csv", os.str());
}

void write_policies(Writer& w, const PolicyTable& a, const PolicyTable& b, const CostSurfaces& cs) {
  std::ostringstream os;
  os << "player,path,step,regime,l,elect\n";
  for (Player i : {Player::A, Player::B}) {
    const PolicyTable& t = i == Player::A ? a : b;
    for (int p = 0; p < t.n_paths(); ++p)
      for (int k = 0; k < cs.end(p); ++k)
        for (int z = 0; z < 2; ++z)
          for (int l = 1; l <= t.M(); ++l)
            os << name(i) << ',' << p << ',' << k << ',' << z << ',' << l << ',' << (t.elect(p, k, z, l) ? 1 : 0)
               << '\n';
  }
  w.text("policies.csv", os.str());
}

json reflection_json(const ReflectionReport& r) {
  json regimes = json::array();
  for (int z = 0; z < 2; ++z) {
    const auto& g = r.regime[z];
    regimes.push_back({{"regime", z},
                       {"max_violation", g.max_violation},
                       {"complementarity", g.complementarity},
                       {"min_dK", g.min_dK},
                       {"total_K", g.total_K},
                       {"value_obstacle_violation", g.value_obstacle_violation},
                       {"nodes", g.nodes},
                       {"forced_nodes", g.forced_nodes}});
  }
  return {{"player", name(r.player)},
          {"regimes", regimes},
          {"budget_monotonicity", r.budget_monotonicity},
          {"scale", r.scale},
          {"tol", r.tol},
          {"pass", r.pass}};
}

json payoff_json(const PayoffEstimate& e) { return {{"mean", e.mean}, {"se", e.se}}; }

json check_json(const PlayerCheck& c) {
  return {{"J", payoff_json(c.j)},
          {"nep_margin", c.margin},
          {"margin_se", c.margin_se},
          {"best_deviation", c.worst},
          {"deviations", c.n_deviations}};
}

json strategy_summary(const SwitchingStrategy& s) {
  int active = 0, total = 0, most = 0;
  for (const auto& p : s.paths) {
    const int n = static_cast<int>(p.size());
    active += n > 0 ? 1 : 0;
    total += n;
    most = std::max(most, n);
  }
  const double np = std::max<std::size_t>(s.paths.size(), 1);
  return {{"paths_with_switches", active}, {"mean_switches", total / np}, {"max_switches", most}};
}

json outcome_json(const GameOutcome& o, bool banal) {
  return {{"certificate", to_string(o.certificate)},
          {"converged", o.converged},
          {"cycle", o.cycle},
          {"iterations", o.iterations},
          {"note", o.note},
          {"banal", banal},
          {"A", check_json(o.A)},
          {"B", check_json(o.B)},
          {"strategies", {{"A", strategy_summary(o.strategy_A)}, {"B", strategy_summary(o.strategy_B)}}},
          {"identical_strategies", o.strategy_A == o.strategy_B},
          {"trace", o.trace}};
}

void write_solution_tables(Writer& w, const RunConfig& cfg, const CostSurfaces& cs, const SwitchingStrategy& a,
                           const SwitchingStrategy& b, const JointRegimePath& jp,
                           const std::vector<const RegimeValueSurface*>& surfaces, const PolicyTable* pa,
                           const PolicyTable* pb) {
  write_strategies(w, a, b, cs);
  if (cfg.outputs.regimes) write_regimes(w, jp, cs);
  write_value_surface(w, surfaces);
  if (cfg.outputs.policies && pa && pb) write_policies(w, *pa, *pb, cs);
}

json value_summary(const Prepared& prep) {
  json j;
  j["n_paths"] = prep.bundle.n_paths();
  j["n_steps"] = prep.bundle.n_steps();
  j["clean_method"] = to_string(prep.clean.method);
  j["clean_fallbacks"] = prep.clean.fallbacks;
  double s0 = 0.0;
  int defaulted = 0;
  for (int p = 0; p < prep.bundle.n_paths(); ++p) {
    s0 += prep.clean(p, 0);
    defaulted += prep.bundle.defaulted(p) ? 1 : 0;
  }
  const double np = prep.bundle.n_paths();
  j["S_rf0"] = s0 / np;
  const double pd = defaulted / np;
  j["default_probability"] = {{"mean", pd}, {"se", std::sqrt(pd * (1.0 - pd) / np)}};
  for (const ExposureSurface* e : {&prep.exposure_A, &prep.exposure_B}) {
    double cva = 0, dva = 0, coll = 0;
    for (int p = 0; p < e->n_paths; ++p) {
      cva += e->cva[e->at(p, 0)];
      dva += e->dva[e->at(p, 0)];
      coll += e->coll[e->at(p, 0)];
    }
    const PayoffEstimate lc = summarize(e->loss_cva), ld = summarize(e->loss_dva);
    j[name(e->perspective)] = {{"cva0", cva / np},
                               {"dva0", dva / np},
                               {"bcva0", (cva - dva) / np},
                               {"coll0", coll / np},
                               {"cva0_se", lc.se},
                               {"dva0_se", ld.se},
                               {"regression_fallbacks", e->regression_fallbacks}};
  }
  return j;
}

}  // namespace

Prepared prepare(const RunConfig& cfg, bool with_costs) {
  Prepared prep;
  prep.bundle = simulate_paths(cfg.model);
  CleanPriceOptions co;
  co.method = cfg.valuation.clean_method;
  co.degree = cfg.valuation.degree;
  co.drift = cfg.model.mu;
  prep.clean = clean_price(prep.bundle, cfg.claim, co);
  ExposureOptions eo;
  eo.degree = cfg.valuation.degree;
  eo.conditioning = cfg.solver.exact(cfg.model.n_paths) ? Conditioning::pathwise : cfg.valuation.conditioning;
  prep.exposure_A = exposure(prep.bundle, cfg.claim, prep.clean, cfg.collateral, Player::A, eo);
  prep.exposure_B = exposure(prep.bundle, cfg.claim, prep.clean, cfg.collateral, Player::B, eo);
  if (with_costs) prep.costs = build_cost_surfaces(prep.bundle, prep.exposure_A, prep.exposure_B, cfg.costs);
  return prep;
}

CostRebuild cost_rebuilder(const Prepared& prep, const CostSetup& setup) {
  return [&prep, setup](const DeltaField& d) {
    return build_cost_surfaces(prep.bundle, prep.exposure_A, prep.exposure_B, setup, &d);
  };
}

RunResult run(const RunConfig& cfg, const std::string& mode, const std::string& out_dir) {
  if (std::find(run_modes().begin(), run_modes().end(), mode) == run_modes().end())
    throw std::invalid_argument("unknown mode '" + mode + "'");
  RunResult res;
  Writer w(out_dir.empty() ? cfg.outputs.dir : out_dir, res);
  write_manifest(w, cfg, mode);
  res.summary = {{"scenario", cfg.scenario}, {"mode", mode}, {"seed", cfg.model.seed}};

  if (mode == "simulate") {
    const PathBundle b = simulate_paths(cfg.model);
    write_paths(w, b);
    int defaulted = 0;
    for (int p = 0; p < b.n_paths(); ++p) defaulted += b.defaulted(p) ? 1 : 0;
    res.summary["defaulted_paths"] = defaulted;
    res.summary["files"] = res.files;
    return res;
  }

  const Prepared prep = prepare(cfg);
  if (cfg.outputs.paths) write_paths(w, prep.bundle);
  if (cfg.outputs.exposures) {
    write_exposure(w, prep.bundle, prep.exposure_A);
    write_exposure(w, prep.bundle, prep.exposure_B);
  }
  if (mode == "value") {
    res.summary["value"] = value_summary(prep);
    w.json_file("value_summary.json", res.summary["value"]);
    res.summary["files"] = res.files;
    return res;
  }
  if (cfg.outputs.costs) write_costs(w, prep.costs);

  const bool exact = cfg.solver.exact(cfg.model.n_paths);
  res.summary["conditioning"] = exact ? "pathwise" : to_string(cfg.solver.conditioning);

  if (mode == "symmetric") {
    const SingleAgentResult sym = solve_symmetric(prep.bundle, prep.costs, cfg.game, cfg.solver);
    const ReflectionReport rep = reflection_residuals(sym.backward.surface, prep.costs, cfg.solver.reflection_tol);
    const json j = {{"V_star", payoff_json(sym.value)},
                    {"backward_value", sym.backward_value},
                    {"strategy", strategy_summary(sym.strategy)},
                    {"tolerance_hint", "compare game-mode J_A and J_B within 2 combined standard errors"},
                    {"regression_fallbacks", sym.backward.surface.regression_fallbacks}};
    w.json_file("symmetric.json", j);
    w.json_file("reflection.json", json::array({reflection_json(rep)}));
    const SwitchingStrategy none{std::vector<PathEvents>(sym.strategy.paths.size())};
    write_solution_tables(w, cfg, prep.costs, sym.strategy, none, sym.path, {&sym.backward.surface},
                          &sym.backward.policy, nullptr);
    res.summary["symmetric"] = j;
    res.summary["files"] = res.files;
    return res;
  }

  const CostRebuild rebuild = cost_rebuilder(prep, cfg.costs);
  const GameResult game = best_response_iteration(prep.bundle, prep.costs, cfg.game, cfg.solver, rebuild);
  json out = outcome_json(game.outcome, game.banal);
  if (symmetry_diagnostics(cfg.costs, cfg.model.n_steps).empty() && !cfg.game.alternating) {
    const SingleAgentResult sym = solve_symmetric(prep.bundle, game.costs, cfg.game, cfg.solver);
    const double tol = 2.0 * std::hypot(game.outcome.A.j.se, sym.value.se);
    const double da = std::abs(game.outcome.A.j.mean - sym.value.mean);
    const double db = std::abs(game.outcome.B.j.mean - sym.value.mean);
    out["symmetric_check"] = {{"V_star", payoff_json(sym.value)},
                              {"abs_diff_A", da},
                              {"abs_diff_B", db},
                              {"tolerance", tol},
                              {"pass", da <= tol + 1e-12 && db <= tol + 1e-12}};
  }
  const ReflectionReport ra = reflection_residuals(game.A.surface, game.costs, cfg.solver.reflection_tol);
  const ReflectionReport rb = reflection_residuals(game.B.surface, game.costs, cfg.solver.reflection_tol);
  w.json_file("reflection.json", json::array({reflection_json(ra), reflection_json(rb)}));
  write_solution_tables(w, cfg, game.costs, game.outcome.strategy_A, game.outcome.strategy_B, game.outcome.path,
                        {&game.A.surface, &game.B.surface}, &game.A.policy, &game.B.policy);

  if (mode == "game") {
    w.json_file("game_outcome.json", out);
    res.summary["game"] = out;
  } else if (mode == "residuals") {
    res.summary["reflection"] = {{"A", reflection_json(ra)}, {"B", reflection_json(rb)}};
    res.summary["game"] = out;
  } else if (mode == "oracle") {
    const OracleResult orc = brute_force_oracle(game.costs, cfg.game, cfg.solver.exhaustive_bound);
    const bool certified = game.outcome.certificate == Certificate::certified;
    const bool inside = orc.contains(game.outcome.strategy_A, game.outcome.strategy_B);
    json per_path = json::array();
    for (const auto& op : orc.paths)
      per_path.push_back({{"strategies_A", op.SA.size()}, {"strategies_B", op.SB.size()}, {"neps", op.neps.size()}});
    const json j = {{"single_agent_value", orc.single_agent_value},
                    {"pairs", orc.pairs},
                    {"nep_set_empty", orc.nep_set_empty},
                    {"paths", per_path},
                    {"game_certificate", to_string(game.outcome.certificate)},
                    {"game_pair_in_nep_set", inside},
                    {"consistent", certified ? inside : true}};
    w.json_file("oracle.json", j);
    w.json_file("game_outcome.json", out);
    res.summary["oracle"] = j;
    res.summary["game"] = out;
  }
  if ((mode == "game" || mode == "oracle") && game.outcome.certificate != Certificate::certified)
    res.outcome = kOutcomeNotCertified;
  res.summary["files"] = res.files;
  return res;
}

}  // namespace csg

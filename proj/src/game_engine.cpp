// SPDX-License-Identifier: Apache-2.0

#include "game_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace csg {

const char* to_string(Target t) {
  switch (t) {
    case Target::to0: return "0";
    case Target::to1: return "1";
    case Target::flip: return "flip";
  }
  return "?";
}

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::certified: return "certified";
    case Certificate::refuted: return "refuted";
    case Certificate::inconclusive: return "inconclusive";
  }
  return "?";
}

int SwitchingStrategy::total_events() const {
  int n = 0;
  for (const auto& p : paths) n += static_cast<int>(p.size());
  return n;
}

namespace {

bool effective(Target t, int z) { return t == Target::flip || static_cast<int>(t) != z; }

// Runs the regime recursion on one path. ea/eb answer whether A/B elect at
// (k, z, l); reg/by receive n + 1 entries.
template <class EA, class EB>
void compose_path(int n, int end, const GameSpec& spec, EA&& ea, EB&& eb, std::uint8_t* reg, std::uint8_t* by) {
  int z = spec.z0;
  int l = spec.M;
  for (int k = 0; k <= n; ++k) {
    std::uint8_t who = 0;
    if (k < end) {
      const bool a = spec.may_act(Player::A, k) && ea(k, z, l);
      const bool b = spec.may_act(Player::B, k) && eb(k, z, l);
      if ((a || b) && l > 0) {
        z = 1 - z;
        --l;
        who = static_cast<std::uint8_t>((a ? 1 : 0) | (b ? 2 : 0));
      }
    }
    reg[k] = static_cast<std::uint8_t>(z);
    by[k] = who;
  }
}

// Elector over one path's event list; events must be sorted by step.
class EventCursor {
 public:
  EventCursor(const PathEvents& ev, Player who, int p, bool strict) : ev_(ev), who_(who), p_(p), strict_(strict) {}
  bool operator()(int k, int z, int l) {
    while (i_ < ev_.size() && ev_[i_].step < k) ++i_;
    if (i_ == ev_.size() || ev_[i_].step != k) return false;
    const bool eff = effective(ev_[i_].target, z);
    if (strict_ && (!eff || l == 0)) {
      std::ostringstream os;
      os << "strategy of " << name(who_) << " on path " << p_ << ": event at step " << k
         << (eff ? " exceeds the switch budget" : " does not change the prevailing regime");
      throw std::invalid_argument(os.str());
    }
    return eff;
  }

 private:
  const PathEvents& ev_;
  Player who_;
  int p_;
  bool strict_;
  std::size_t i_ = 0;
};

void check_strategy(const SwitchingStrategy& s, Player who, const std::vector<int>& end_step, const GameSpec& spec) {
  if (s.paths.size() != end_step.size()) {
    throw std::invalid_argument(std::string("strategy of ") + name(who) + " covers " +
                                std::to_string(s.paths.size()) + " paths, expected " +
                                std::to_string(end_step.size()));
  }
  for (std::size_t p = 0; p < s.paths.size(); ++p) {
    const auto& ev = s.paths[p];
    std::ostringstream os;
    os << "strategy of " << name(who) << " on path " << p << ": ";
    if (static_cast<int>(ev.size()) > spec.M) throw std::invalid_argument(os.str() + "more events than the budget");
    for (std::size_t j = 0; j < ev.size(); ++j) {
      if (ev[j].step < 0 || ev[j].step >= end_step[p])
        throw std::invalid_argument(os.str() + "event at step " + std::to_string(ev[j].step) + " is out of range");
      if (j > 0 && ev[j].step <= ev[j - 1].step)
        throw std::invalid_argument(os.str() + "event steps must be strictly increasing");
      if (!spec.may_act(who, ev[j].step))
        throw std::invalid_argument(os.str() + "player may not act at step " + std::to_string(ev[j].step));
    }
  }
}

PathEvents normalized(PathEvents ev) {
  std::stable_sort(ev.begin(), ev.end(), [](const SwitchEvent& x, const SwitchEvent& y) { return x.step < y.step; });
  ev.erase(std::unique(ev.begin(), ev.end(), [](const SwitchEvent& x, const SwitchEvent& y) { return x.step == y.step; }),
           ev.end());
  return ev;
}

JointRegimePath blank_path(int np, int n, const std::vector<int>& end_step) {
  JointRegimePath j;
  j.n_paths = np;
  j.n_steps = n;
  const auto cells = static_cast<std::size_t>(np) * static_cast<std::size_t>(n + 1);
  j.regime.assign(cells, 0);
  j.by.assign(cells, 0);
  j.end_step = end_step;
  return j;
}

}  // namespace

PolicyTable open_loop_table(const SwitchingStrategy& s, int n_steps, int M) {
  PolicyTable t(static_cast<int>(s.paths.size()), n_steps, M);
  for (std::size_t p = 0; p < s.paths.size(); ++p) {
    for (const auto& e : s.paths[p]) {
      if (e.step < 0 || e.step >= n_steps) continue;
      for (int z = 0; z < 2; ++z) {
        if (!effective(e.target, z)) continue;
        for (int l = 1; l <= M; ++l) t.set(static_cast<int>(p), e.step, z, l, true);
      }
    }
  }
  return t;
}

int JointRegimePath::switches(int p) const {
  int s = 0;
  for (int k = 0; k <= n_steps; ++k) s += by[cell(p, k)] != 0 ? 1 : 0;
  return s;
}

SwitchingStrategy JointRegimePath::realized(Player i) const {
  const int bit = i == Player::A ? 1 : 2;
  SwitchingStrategy s;
  s.paths.resize(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    for (int k = 0; k <= n_steps; ++k) {
      if (by[cell(p, k)] & bit)
        s.paths[static_cast<std::size_t>(p)].push_back({k, z(p, k) == 0 ? Target::to0 : Target::to1});
    }
  }
  return s;
}

JointRegimePath compose_regimes(const PolicyTable& a, const PolicyTable& b, const std::vector<int>& end_step,
                                const GameSpec& spec) {
  if (a.n_paths() != b.n_paths() || a.n_steps() != b.n_steps() || a.M() < spec.M || b.M() < spec.M ||
      static_cast<int>(end_step.size()) != a.n_paths())
    throw std::invalid_argument("compose_regimes: policies are not defined on the same grid");
  const int n = a.n_steps();
  JointRegimePath j = blank_path(a.n_paths(), n, end_step);
  for (int p = 0; p < a.n_paths(); ++p) {
    compose_path(
        n, end_step[static_cast<std::size_t>(p)], spec, [&](int k, int z, int l) { return a.elect(p, k, z, l); },
        [&](int k, int z, int l) { return b.elect(p, k, z, l); }, &j.regime[j.cell(p, 0)], &j.by[j.cell(p, 0)]);
  }
  return j;
}

JointRegimePath compose_regimes(const SwitchingStrategy& a, const SwitchingStrategy& b,
                                const std::vector<int>& end_step, int n_steps, const GameSpec& spec,
                                bool strict) {
  const int np = static_cast<int>(end_step.size());
  if (static_cast<int>(a.paths.size()) != np || static_cast<int>(b.paths.size()) != np)
    throw std::invalid_argument("compose_regimes: strategies do not cover the same paths");
  if (strict) {
    check_strategy(a, Player::A, end_step, spec);
    check_strategy(b, Player::B, end_step, spec);
  }
  JointRegimePath j = blank_path(np, n_steps, end_step);
  for (int p = 0; p < np; ++p) {
    const auto& ea = a.paths[static_cast<std::size_t>(p)];
    const auto& eb = b.paths[static_cast<std::size_t>(p)];
    if (strict) {
      EventCursor ca(ea, Player::A, p, true), cb(eb, Player::B, p, true);
      compose_path(n_steps, end_step[static_cast<std::size_t>(p)], spec, ca, cb, &j.regime[j.cell(p, 0)],
                   &j.by[j.cell(p, 0)]);
    } else {
      const PathEvents na = normalized(ea), nb = normalized(eb);
      EventCursor ca(na, Player::A, p, false), cb(nb, Player::B, p, false);
      compose_path(n_steps, end_step[static_cast<std::size_t>(p)], spec, ca, cb, &j.regime[j.cell(p, 0)],
                   &j.by[j.cell(p, 0)]);
    }
  }
  return j;
}

double path_payoff(Player i, const JointRegimePath& path, const CostSurfaces& costs, int p) {
  const int end = costs.end(p);
  double v = 0.0;
  for (int k = 0; k < end; ++k) {
    const int z = path.z(p, k);
    v += costs.bank[static_cast<std::size_t>(k)] * costs.running(i, z, p, k) * costs.dt(k);
    if (path.changed_by(p, k) != 0) v += costs.switching(i, z, k);
  }
  return v + costs.terminal(i, path.z(p, end), p);
}

PayoffEstimate summarize(std::vector<double> values) {
  PayoffEstimate e;
  const auto n = values.size();
  if (n > 0) {
    double s = 0.0;
    for (double v : values) s += v;
    e.mean = s / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - e.mean) * (v - e.mean);
      e.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
  }
  e.per_path = std::move(values);
  return e;
}

PayoffEstimate evaluate_payoff(Player i, const JointRegimePath& path, const CostSurfaces& costs, int threads) {
  if (path.n_paths != costs.n_paths || path.n_steps != costs.n_steps)
    throw std::invalid_argument("evaluate_payoff: regime path and cost surfaces differ in shape");
  std::vector<double> v(static_cast<std::size_t>(path.n_paths), 0.0);
  parallel_for(path.n_paths, threads, [&](int b, int e) {
    for (int p = b; p < e; ++p) v[static_cast<std::size_t>(p)] = path_payoff(i, path, costs, p);
  });
  return summarize(std::move(v));
}

long long count_path_strategies(int d, int M) {
  long long total = 0, binom = 1, pow2 = 1;
  for (int m = 0; m <= std::min(M, d); ++m) {
    total += binom * pow2;
    binom = binom * (d - m) / (m + 1);
    pow2 *= 2;
  }
  return total;
}

std::vector<PathEvents> enumerate_path_strategies(const std::vector<int>& steps, int M) {
  std::vector<PathEvents> out;
  PathEvents cur;
  auto rec = [&](auto&& self, std::size_t from) -> void {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == M) return;
    for (std::size_t s = from; s < steps.size(); ++s) {
      for (Target t : {Target::to0, Target::to1}) {
        cur.push_back({steps[s], t});
        self(self, s + 1);
        cur.pop_back();
      }
    }
  };
  rec(rec, 0);
  return out;
}

namespace {

// Payoff on one path for explicit event lists (lenient composition).
double single_path_payoff(Player i, int p, const PathEvents& own, const PathEvents& opp, const CostSurfaces& costs,
                          const GameSpec& spec, std::vector<std::uint8_t>& reg, std::vector<std::uint8_t>& by) {
  const int n = costs.n_steps;
  const int end = costs.end(p);
  EventCursor co(own, i, p, false), cp(opp, other(i), p, false);
  if (i == Player::A) compose_path(n, end, spec, co, cp, reg.data(), by.data());
  else compose_path(n, end, spec, cp, co, reg.data(), by.data());
  double v = 0.0;
  for (int k = 0; k < end; ++k) {
    v += costs.bank[static_cast<std::size_t>(k)] * costs.running(i, reg[static_cast<std::size_t>(k)], p, k) *
         costs.dt(k);
    if (by[static_cast<std::size_t>(k)] != 0) v += costs.switching(i, reg[static_cast<std::size_t>(k)], k);
  }
  return v + costs.terminal(i, reg[static_cast<std::size_t>(end)], p);
}

struct Deviation {
  std::string label;
  SwitchingStrategy s;
};

using Mutation = std::function<PathEvents(const PathEvents&, int end)>;

SwitchingStrategy apply_all(const SwitchingStrategy& s, const CostSurfaces& costs, const Mutation& m) {
  SwitchingStrategy out;
  out.paths.resize(s.paths.size());
  for (std::size_t p = 0; p < s.paths.size(); ++p)
    out.paths[p] = normalized(m(s.paths[p], costs.end(static_cast<int>(p))));
  return out;
}

Mutation delete_event(std::size_t j) {
  return [j](const PathEvents& ev, int) {
    PathEvents out = ev;
    if (j < out.size()) out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
    return out;
  };
}

Mutation delay_event(std::size_t j, int d, const GameSpec& spec, Player who) {
  return [=](const PathEvents& ev, int end) {
    PathEvents out = ev;
    if (j < out.size()) {
      out[j].step += d;
      if (out[j].step >= end || !spec.may_act(who, out[j].step)) out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  };
}

Mutation insert_event(int k) {
  return [k](const PathEvents& ev, int end) {
    PathEvents out = ev;
    if (k < end && std::none_of(out.begin(), out.end(), [k](const SwitchEvent& e) { return e.step == k; }))
      out.push_back({k, Target::flip});
    return out;
  };
}

}  // namespace

GameOutcome certify_nep(const SwitchingStrategy& a, const SwitchingStrategy& b, const CostSurfaces& costs,
                        const GameSpec& spec, const CertifyOptions& opts, const BestResponseFn& best_response) {
  const int np = costs.n_paths;
  const int n = costs.n_steps;
  GameOutcome out;
  out.strategy_A = a;
  out.strategy_B = b;
  out.path = compose_regimes(a, b, costs.end_step, n, spec, false);

  for (Player i : {Player::A, Player::B}) {
    PlayerCheck& chk = i == Player::A ? out.A : out.B;
    const SwitchingStrategy& own = i == Player::A ? a : b;
    const SwitchingStrategy& opp = i == Player::A ? b : a;
    chk.j = evaluate_payoff(i, out.path, costs, opts.threads);
    const auto& cand = chk.j.per_path;
    chk.margin = 0.0;
    chk.worst = "candidate";

    auto consider = [&](const std::string& label, const std::vector<double>& dev) {
      std::vector<double> diff(dev.size());
      for (std::size_t p = 0; p < dev.size(); ++p) diff[p] = dev[p] - cand[p];
      const PayoffEstimate d = summarize(std::move(diff));
      ++chk.n_deviations;
      if (d.mean < chk.margin) {
        chk.margin = d.mean;
        chk.margin_se = d.se;
        chk.worst = label;
      }
    };
    auto evaluate_dev = [&](const SwitchingStrategy& dev) {
      const JointRegimePath jp = i == Player::A ? compose_regimes(dev, opp, costs.end_step, n, spec, false)
                                                : compose_regimes(opp, dev, costs.end_step, n, spec, false);
      return evaluate_payoff(i, jp, costs, opts.threads).per_path;
    };

    if (opts.exact) {
      // Each path is its own information set: scan every strategy per path.
      std::vector<double> best(static_cast<std::size_t>(np), 0.0);
      long long scanned = 0;
      std::vector<std::uint8_t> reg(static_cast<std::size_t>(n + 1)), by(static_cast<std::size_t>(n + 1));
      for (int p = 0; p < np; ++p) {
        std::vector<int> steps;
        for (int k = 0; k < costs.end(p); ++k)
          if (spec.may_act(i, k)) steps.push_back(k);
        const auto cands = enumerate_path_strategies(steps, spec.M);
        scanned += static_cast<long long>(cands.size());
        double m = cand[static_cast<std::size_t>(p)];
        for (const auto& s : cands)
          m = std::min(m, single_path_payoff(i, p, s, normalized(opp.paths[static_cast<std::size_t>(p)]), costs, spec,
                                             reg, by));
        best[static_cast<std::size_t>(p)] = m;
      }
      consider("pathwise exhaustive", best);
      chk.margin_se = 0.0;  // the scan is the whole probability space
      chk.n_deviations = static_cast<int>(std::min<long long>(scanned, 1LL << 30));
      continue;
    }

    std::vector<Deviation> devs;
    devs.push_back({"never", SwitchingStrategy{std::vector<PathEvents>(static_cast<std::size_t>(np))}});
    for (int j = 0; j < spec.M; ++j) {
      devs.push_back({"delete #" + std::to_string(j), apply_all(own, costs, delete_event(static_cast<std::size_t>(j)))});
      for (int d : {1, 2})
        devs.push_back({"delay #" + std::to_string(j) + " by " + std::to_string(d),
                        apply_all(own, costs, delay_event(static_cast<std::size_t>(j), d, spec, i))});
    }
    for (int k = 0; k < n; ++k)
      if (spec.may_act(i, k)) devs.push_back({"insert at " + std::to_string(k), apply_all(own, costs, insert_event(k))});

    std::mt19937_64 rng(opts.seed * 2654435761u + static_cast<std::uint64_t>(index(i)));
    for (int r = 0; r < opts.random_mutations; ++r) {
      SwitchingStrategy s = own;
      std::string label = "mutation " + std::to_string(r) + ":";
      const int ops = 1 + static_cast<int>(rng() % 3);
      for (int o = 0; o < ops; ++o) {
        const int kind = static_cast<int>(rng() % 3);
        const auto j = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(std::max(spec.M, 1)));
        if (kind == 0) {
          s = apply_all(s, costs, delete_event(j));
          label += " delete";
        } else if (kind == 1) {
          const int d = 1 + static_cast<int>(rng() % 3);
          s = apply_all(s, costs, delay_event(j, d, spec, i));
          label += " delay";
        } else {
          const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(n, 1)));
          s = apply_all(s, costs, insert_event(k));
          label += " insert";
        }
      }
      devs.push_back({label, std::move(s)});
    }

    std::vector<int> steps;
    for (int k = 0; k < n; ++k)
      if (spec.may_act(i, k)) steps.push_back(k);
    if (count_path_strategies(static_cast<int>(steps.size()), spec.M) <= opts.exhaustive_bound) {
      for (const auto& ev : enumerate_path_strategies(steps, spec.M)) {
        SwitchingStrategy s{std::vector<PathEvents>(static_cast<std::size_t>(np), ev)};
        for (std::size_t p = 0; p < s.paths.size(); ++p) {
          auto& pe = s.paths[p];
          const int end = costs.end(static_cast<int>(p));
          pe.erase(std::remove_if(pe.begin(), pe.end(), [end](const SwitchEvent& e) { return e.step >= end; }), pe.end());
        }
        devs.push_back({"uniform strategy", std::move(s)});
      }
    }

    for (const auto& d : devs) consider(d.label, evaluate_dev(d.s));

    if (best_response) {
      const PolicyTable opp_table = open_loop_table(opp, n, spec.M);
      const PolicyTable br = best_response(i, opp_table);
      const JointRegimePath jp = i == Player::A ? compose_regimes(br, opp_table, costs.end_step, spec)
                                                : compose_regimes(opp_table, br, costs.end_step, spec);
      consider("best response", evaluate_payoff(i, jp, costs, opts.threads).per_path);
    }
  }

  const double scale = std::max(std::abs(out.A.j.mean), std::abs(out.B.j.mean));
  const double tol = opts.abs_tol * (1.0 + scale);
  auto ok = [&](const PlayerCheck& c, double z) { return c.margin >= -(tol + z * c.margin_se); };
  if (ok(out.A, opts.z) && ok(out.B, opts.z)) out.certificate = Certificate::certified;
  else if (opts.exact || !ok(out.A, opts.refute_z) || !ok(out.B, opts.refute_z)) out.certificate = Certificate::refuted;
  else out.certificate = Certificate::inconclusive;
  for (Player i : {Player::A, Player::B}) {
    const PlayerCheck& c = i == Player::A ? out.A : out.B;
    std::ostringstream os;
    os << name(i) << ": margin " << c.margin << " (s.e. " << c.margin_se << ") over " << c.n_deviations
       << " deviations, best: " << c.worst;
    out.trace.push_back(os.str());
  }
  return out;
}

bool detect_banal(const GameOutcome& outcome, double eps) {
  const std::size_t np = outcome.strategy_A.paths.size();
  if (np == 0) return true;
  std::size_t quiet = 0;
  for (std::size_t p = 0; p < np; ++p)
    if (outcome.strategy_A.paths[p].empty() && outcome.strategy_B.paths[p].empty()) ++quiet;
  return static_cast<double>(quiet) >= (1.0 - eps) * static_cast<double>(np) - 1e-12;
}

}  // namespace csg

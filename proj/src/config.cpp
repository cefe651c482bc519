// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <fstream>
#include <sstream>

namespace csg {

using nlohmann::json;

SolverMode parse_solver_mode(const std::string& s) {
  if (s == "game") return SolverMode::game;
  if (s == "symmetric") return SolverMode::symmetric;
  if (s == "zero_sum_banal") return SolverMode::zero_sum_banal;
  throw std::invalid_argument("unknown solver mode '" + s + "'");
}

const char* to_string(SolverMode m) {
  switch (m) {
    case SolverMode::game: return "game";
    case SolverMode::symmetric: return "symmetric";
    case SolverMode::zero_sum_banal: return "zero_sum_banal";
  }
  return "?";
}

json Diagnostics::to_json() const { return json{{"errors", errors}, {"warnings", warnings}, {"ok", ok()}}; }

json default_config() {
  const json funding = {{"borrow_spread", 0.0}, {"remuneration_basis", 0.0}, {"opportunity_premium", 0.0}};
  const json player = {{"delta", 0.0}, {"c_to0", 0.02}, {"c_to1", 0.02}};
  return json{
      {"scenario", "default"},
      {"engine", {{"threads", 1}}},
      {"model",
       {{"x0", 1.0},
        {"lambdaA0", 0.02},
        {"lambdaB0", 0.02},
        {"mu", 0.0},
        {"sigma", 0.2},
        {"gamma", 0.0},
        {"nu", 0.0},
        {"chi", 0.0},
        {"eta", 0.0},
        {"rho", {{"x_lA", 0.0}, {"x_lB", 0.0}, {"lA_lB", 0.0}}},
        {"r", 0.0},
        {"T", 1.0},
        {"n_steps", 10},
        {"n_paths", 1000},
        {"seed", 1}}},
      {"claim",
       {{"kind", "forward"},
        {"strike", 1.0},
        {"notional", 1.0},
        {"payment_steps", json::array()},
        {"payment_every", 0},
        {"recovery_A", 0.4},
        {"recovery_B", 0.4}}},
      {"collateral", {{"mode", "thresholded"}, {"gammaA", 0.0}, {"gammaB", 0.0}, {"mta", 0.0}}},
      {"funding", {{"A", funding}, {"B", funding}}},
      {"costs", {{"form", "auto"}, {"delta_mode", "constant"}, {"A", player}, {"B", player}}},
      {"valuation", {{"clean_method", "auto"}, {"degree", 2}, {"conditioning", "regression"}}},
      {"game", {{"M", 2}, {"z0", 1}, {"alternating_dates", false}}},
      {"solver",
       {{"mode", "game"},
        {"degree", 2},
        {"br_max_iters", 20},
        {"br_tol", 0.0},
        {"exhaustive_bound", 4096},
        {"exact_paths_max", 8},
        {"conditioning", "regression"},
        {"reflection_tol", 1e-8},
        {"banal_eps", 0.0},
        {"certify", {{"abs_tol", 1e-10}, {"z", 2.0}, {"refute_z", 3.0}, {"random_mutations", 16}, {"seed", 7}}}}},
      {"outputs",
       {{"dir", "out"},
        {"write_paths", true},
        {"write_exposures", true},
        {"write_costs", true},
        {"write_policies", false},
        {"write_regimes", true}}},
  };
}

json parse_config_text(const std::string& text, const std::string& origin) {
  // Blank out comment lines so parse positions still match the file.
  std::string clean;
  clean.reserve(text.size());
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') line.clear();
    clean += line;
    clean += '\n';
  }
  try {
    return json::parse(clean);
  } catch (const json::parse_error& e) {
    std::size_t ln = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < clean.size(); ++i) {
      if (clean[i] == '\n') {
        ++ln;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << ln << ":" << col << ": " << e.what();
    throw ParseError(os.str());
  }
}

json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

void set_dotted(json& cfg, const std::string& key, const json& value) {
  if (key.empty()) throw ConfigError("override key is empty");
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  set_dotted(cfg, key, value);
}

namespace {

void unknown_keys(const json& user, const json& defaults, const std::string& prefix, Diagnostics& d) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) {
      d.errors.push_back("unknown key '" + key + "'");
      continue;
    }
    const json& def = defaults.at(it.key());
    if (def.is_object()) {
      if (!it->is_object()) d.errors.push_back("'" + key + "' must be an object");
      else unknown_keys(*it, def, key, d);
    }
  }
}

// Reads typed values out of the merged config, recording failures.
class Reader {
 public:
  Reader(const json& root, Diagnostics& d) : root_(root), d_(d) {}

  const json* node(const std::string& key) const {
    const json* n = &root_;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!n->is_object() || !n->contains(part)) return nullptr;
      n = &n->at(part);
      if (dot == std::string::npos) return n;
      start = dot + 1;
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    const json* n = node(key);
    if (!n) {
      d_.errors.push_back("missing key '" + key + "'");
      return fallback;
    }
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!n->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!n->is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!n->is_boolean()) throw std::invalid_argument("expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!n->is_string()) throw std::invalid_argument("expected a string");
      }
      return n->get<T>();
    } catch (const std::exception& e) {
      d_.errors.push_back("'" + key + "': " + e.what());
      return fallback;
    }
  }

  template <class E, class Parse>
  E choice(const std::string& key, E fallback, Parse parse) {
    const std::string s = get<std::string>(key, "");
    if (s.empty()) return fallback;
    try {
      return parse(s);
    } catch (const std::exception& e) {
      d_.errors.push_back("'" + key + "': " + e.what());
      return fallback;
    }
  }

  Coefficient coefficient(const std::string& key) {
    const json* n = node(key);
    if (n && n->is_number()) return Coefficient::constant(n->get<double>());
    if (n && n->is_object() && n->size() == 2 && n->contains("a") && n->contains("b") && n->at("a").is_number() &&
        n->at("b").is_number())
      return Coefficient::affine(n->at("a").get<double>(), n->at("b").get<double>());
    d_.errors.push_back("'" + key + "' must be a number or {\"a\": number, \"b\": number}");
    return {};
  }

  ShortRate short_rate(const std::string& key) {
    const json* n = node(key);
    if (n && n->is_number()) return ShortRate::flat(n->get<double>());
    try {
      if (n && n->is_object())
        return ShortRate{n->at("times").get<std::vector<double>>(), n->at("rates").get<std::vector<double>>()};
    } catch (const std::exception&) {
    }
    d_.errors.push_back("'" + key + "' must be a number or {\"times\": [...], \"rates\": [...]}");
    return ShortRate::flat(0.0);
  }

  std::vector<double> curve(const std::string& key) {
    const json* n = node(key);
    if (n && n->is_number()) return {n->get<double>()};
    if (n && n->is_array() && !n->empty() && std::all_of(n->begin(), n->end(), [](const json& v) { return v.is_number(); }))
      return n->get<std::vector<double>>();
    d_.errors.push_back("'" + key + "' must be a number or a non-empty array of numbers");
    return {0.0};
  }

  std::vector<int> int_list(const std::string& key) {
    const json* n = node(key);
    if (n && n->is_array() && std::all_of(n->begin(), n->end(), [](const json& v) { return v.is_number_integer(); }))
      return n->get<std::vector<int>>();
    d_.errors.push_back("'" + key + "' must be an array of integers");
    return {};
  }

 private:
  const json& root_;
  Diagnostics& d_;
};

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

RunConfig build_run_config(const json& user, Diagnostics& d, const std::string& run_mode) {
  RunConfig rc;
  const json defaults = default_config();
  if (!user.is_object()) {
    d.errors.emplace_back("config root must be a JSON object");
    return rc;
  }
  unknown_keys(user, defaults, "", d);
  json merged = defaults;
  merged.merge_patch(user);
  Reader r(merged, d);

  rc.scenario = r.get<std::string>("scenario", "");
  if (rc.scenario.empty()) d.errors.emplace_back("scenario name must not be empty");
  const int threads = r.get<int>("engine.threads", 1);

  auto& m = rc.model;
  m.x0 = r.get<double>("model.x0", 1.0);
  m.lambdaA0 = r.get<double>("model.lambdaA0", 0.0);
  m.lambdaB0 = r.get<double>("model.lambdaB0", 0.0);
  m.mu = r.coefficient("model.mu");
  m.sigma = r.coefficient("model.sigma");
  m.gamma = r.coefficient("model.gamma");
  m.nu = r.coefficient("model.nu");
  m.chi = r.coefficient("model.chi");
  m.eta = r.coefficient("model.eta");
  m.rho_x_lA = r.get<double>("model.rho.x_lA", 0.0);
  m.rho_x_lB = r.get<double>("model.rho.x_lB", 0.0);
  m.rho_lA_lB = r.get<double>("model.rho.lA_lB", 0.0);
  m.r = r.short_rate("model.r");
  m.T = r.get<double>("model.T", 1.0);
  m.n_steps = r.get<int>("model.n_steps", 1);
  m.n_paths = r.get<int>("model.n_paths", 1);
  m.seed = r.get<std::uint64_t>("model.seed", 1);
  m.threads = threads;
  append(d.errors, m.diagnostics());

  auto& c = rc.claim;
  c.kind = r.choice("claim.kind", ClaimSpec::Kind::forward, [](const std::string& s) {
    if (s == "zero") return ClaimSpec::Kind::zero;
    if (s == "forward") return ClaimSpec::Kind::forward;
    if (s == "swap") return ClaimSpec::Kind::swap;
    throw std::invalid_argument("unknown claim kind '" + s + "'");
  });
  c.strike = r.get<double>("claim.strike", 0.0);
  c.notional = r.get<double>("claim.notional", 1.0);
  c.payment_steps = r.int_list("claim.payment_steps");
  const int every = r.get<int>("claim.payment_every", 0);
  if (every < 0) d.errors.emplace_back("claim.payment_every must be >= 0");
  if (c.kind == ClaimSpec::Kind::swap && c.payment_steps.empty() && every > 0) {
    for (int k = every; k <= m.n_steps; k += every) c.payment_steps.push_back(k);
    set_dotted(merged, "claim.payment_steps", c.payment_steps);
    set_dotted(merged, "claim.payment_every", 0);
  }
  c.recovery_A = r.get<double>("claim.recovery_A", 0.4);
  c.recovery_B = r.get<double>("claim.recovery_B", 0.4);
  if (m.n_steps >= 1) append(d.errors, c.diagnostics(m.n_steps));

  auto& col = rc.collateral;
  col.mode = r.choice("collateral.mode", CollateralSpec::Mode::thresholded, [](const std::string& s) {
    if (s == "zero") return CollateralSpec::Mode::zero;
    if (s == "perfect") return CollateralSpec::Mode::perfect;
    if (s == "thresholded") return CollateralSpec::Mode::thresholded;
    throw std::invalid_argument("unknown collateral mode '" + s + "'");
  });
  col.gammaA = r.get<double>("collateral.gammaA", 0.0);
  col.gammaB = r.get<double>("collateral.gammaB", 0.0);
  col.mta = r.get<double>("collateral.mta", 0.0);
  append(d.errors, col.diagnostics());

  rc.solver_mode = r.choice("solver.mode", SolverMode::game, parse_solver_mode);
  const std::string form = r.get<std::string>("costs.form", "auto");
  if (form == "auto") {
    rc.costs.form = rc.solver_mode == SolverMode::zero_sum_banal ? CostForm::linear : CostForm::quadratic;
    set_dotted(merged, "costs.form", to_string(rc.costs.form));
  } else {
    rc.costs.form = r.choice("costs.form", CostForm::quadratic, parse_cost_form);
    if (rc.solver_mode == SolverMode::zero_sum_banal && rc.costs.form != CostForm::linear)
      d.errors.emplace_back("solver.mode zero_sum_banal needs costs.form linear");
  }
  rc.costs.delta_mode = r.choice("costs.delta_mode", DeltaMode::constant, parse_delta_mode);
  for (Player i : {Player::A, Player::B}) {
    const std::string pk = std::string("costs.") + name(i);
    const std::string fk = std::string("funding.") + name(i);
    auto& pc = rc.costs.player[static_cast<std::size_t>(index(i))];
    pc.delta = r.get<double>(pk + ".delta", 0.0);
    pc.c_to0 = r.curve(pk + ".c_to0");
    pc.c_to1 = r.curve(pk + ".c_to1");
    pc.funding.borrow_spread = r.get<double>(fk + ".borrow_spread", 0.0);
    pc.funding.remuneration_basis = r.get<double>(fk + ".remuneration_basis", 0.0);
    pc.funding.opportunity_premium = r.get<double>(fk + ".opportunity_premium", 0.0);
    if (m.n_steps >= 1) append(d.errors, pc.diagnostics(i, m.n_steps));
    append(d.warnings, pc.funding.warnings(i));
  }

  rc.valuation.clean_method = r.choice("valuation.clean_method", CleanMethod::automatic, parse_clean_method);
  rc.valuation.degree = r.get<int>("valuation.degree", 2);
  rc.valuation.conditioning = r.choice("valuation.conditioning", Conditioning::regression, parse_conditioning);
  if (rc.valuation.degree < 0) d.errors.emplace_back("valuation.degree must be >= 0");

  rc.game.M = r.get<int>("game.M", 1);
  rc.game.z0 = r.get<int>("game.z0", 1);
  rc.game.alternating = r.get<bool>("game.alternating_dates", false);
  if (rc.game.M < 1) d.errors.emplace_back("game.M must be >= 1");
  if (rc.game.z0 != 0 && rc.game.z0 != 1) d.errors.emplace_back("game.z0 must be 0 or 1");

  auto& s = rc.solver;
  s.degree = r.get<int>("solver.degree", 2);
  s.br_max_iters = r.get<int>("solver.br_max_iters", 20);
  s.br_tol = r.get<double>("solver.br_tol", 0.0);
  s.exhaustive_bound = r.get<long long>("solver.exhaustive_bound", 4096);
  s.exact_paths_max = r.get<int>("solver.exact_paths_max", 8);
  s.conditioning = r.choice("solver.conditioning", Conditioning::regression, parse_conditioning);
  s.reflection_tol = r.get<double>("solver.reflection_tol", 1e-8);
  s.banal_eps = r.get<double>("solver.banal_eps", 0.0);
  s.certify.abs_tol = r.get<double>("solver.certify.abs_tol", 1e-10);
  s.certify.z = r.get<double>("solver.certify.z", 2.0);
  s.certify.refute_z = r.get<double>("solver.certify.refute_z", 3.0);
  s.certify.random_mutations = r.get<int>("solver.certify.random_mutations", 16);
  s.certify.seed = r.get<std::uint64_t>("solver.certify.seed", 7);
  s.threads = threads;
  s.certify.threads = threads;
  s.certify.exhaustive_bound = s.exhaustive_bound;
  append(d.errors, s.diagnostics());
  if (s.certify.random_mutations < 0) d.errors.emplace_back("solver.certify.random_mutations must be >= 0");

  auto& o = rc.outputs;
  o.dir = r.get<std::string>("outputs.dir", "out");
  o.paths = r.get<bool>("outputs.write_paths", true);
  o.exposures = r.get<bool>("outputs.write_exposures", true);
  o.costs = r.get<bool>("outputs.write_costs", true);
  o.policies = r.get<bool>("outputs.write_policies", false);
  o.regimes = r.get<bool>("outputs.write_regimes", true);
  if (o.dir.empty()) d.errors.emplace_back("outputs.dir must not be empty");

  if (m.n_steps >= 1) {
    const bool symmetric = rc.solver_mode == SolverMode::symmetric || run_mode == "symmetric";
    if (symmetric) {
      append(d.errors, symmetry_diagnostics(rc.costs, m.n_steps));
      if (rc.game.alternating) d.errors.emplace_back("symmetric: alternating decision dates break the symmetry");
    } else {
      for (Player i : {Player::A, Player::B}) {
        const double floor = rc.costs.of(i).c_floor(m.n_steps);
        if (!(floor > 0.0)) {
          std::ostringstream os;
          os << "Hp3: min switching cost of " << name(i) << " is " << floor << ", switching may pay off for free";
          d.warnings.push_back(os.str());
        }
      }
    }
    if (rc.solver_mode == SolverMode::zero_sum_banal) {
      if (!(rc.costs.of(Player::A).funding == rc.costs.of(Player::B).funding))
        d.warnings.emplace_back("zero_sum_banal: funding of A and B differs");
      if (rc.costs.of(Player::A).delta != 0.0 || rc.costs.of(Player::B).delta != 0.0)
        d.warnings.emplace_back("zero_sum_banal: non-zero deltas break the zero-sum property");
    }
  }
  rc.resolved = std::move(merged);
  return rc;
}

Diagnostics validate_config(const json& user, const std::string& run_mode) {
  Diagnostics d;
  build_run_config(user, d, run_mode);
  return d;
}

}  // namespace csg

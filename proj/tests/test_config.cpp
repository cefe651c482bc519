// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "config.hpp"

using namespace csg;
using nlohmann::json;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("defaults are valid") {
  Diagnostics d;
  const RunConfig rc = build_run_config(json::object(), d);
  CHECK(d.ok());
  CHECK(rc.game.z0 == 1);
  CHECK(rc.resolved.contains("model"));
}

TEST_CASE("comment lines and parse errors") {
  const json j = parse_config_text("# header\n{\n  # inline comment line\n  \"scenario\": \"x\"\n}\n");
  CHECK(j["scenario"] == "x");
  try {
    parse_config_text("{\n  \"a\": 1,\n  \"b\": \n}\n", "bad.json");
    FAIL("no parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.json:4") != std::string::npos);
  }
}

TEST_CASE("dotted overrides") {
  json j = json::object();
  apply_override(j, "costs.A.c_to0=0.05");
  apply_override(j, "scenario=smoke");
  apply_override(j, "model.rho.x_lA=-0.3");
  CHECK(j["costs"]["A"]["c_to0"] == 0.05);
  CHECK(j["scenario"] == "smoke");
  Diagnostics d;
  const RunConfig rc = build_run_config(j, d);
  CHECK(d.ok());
  CHECK(rc.costs.of(Player::A).c(0, 0) == 0.05);
  CHECK(rc.model.rho_x_lA == -0.3);
  CHECK_THROWS(apply_override(j, "no_equals_sign"));
}

TEST_CASE("unknown keys and wrong types are reported") {
  Diagnostics d;
  build_run_config(json{{"model", {{"sigmaa", 0.2}, {"n_paths", "many"}}}}, d);
  CHECK(mentions(d.errors, "model.sigmaa"));
  CHECK(mentions(d.errors, "model.n_paths"));
}

TEST_CASE("non-PSD correlation is a configuration error") {
  json j = json::object();
  set_dotted(j, "model.rho.x_lA", 0.9);
  set_dotted(j, "model.rho.x_lB", -0.9);
  set_dotted(j, "model.rho.lA_lB", 0.9);
  CHECK_FALSE(validate_config(j).ok());
}

TEST_CASE("zero switching cost warns outside the symmetric mode and fails inside it") {
  json j = json::object();
  set_dotted(j, "costs.A.c_to0", 0.0);
  const Diagnostics g = validate_config(j, "game");
  CHECK(g.ok());
  CHECK(mentions(g.warnings, "Hp3"));
  const Diagnostics s = validate_config(j, "symmetric");
  CHECK_FALSE(s.ok());
}

TEST_CASE("symmetric mode lists every violated hypothesis") {
  json j = json::object();
  set_dotted(j, "costs.A.delta", 0.1);
  set_dotted(j, "costs.B.c_to1", 0.05);
  set_dotted(j, "funding.A.borrow_spread", 0.01);
  const Diagnostics d = validate_config(j, "symmetric");
  CHECK(d.errors.size() >= 3);
}

TEST_CASE("payment schedule shorthand and cost form resolution") {
  json j = json::object();
  set_dotted(j, "claim.kind", "swap");
  set_dotted(j, "claim.payment_every", 2);
  set_dotted(j, "model.n_steps", 6);
  set_dotted(j, "solver.mode", "zero_sum_banal");
  Diagnostics d;
  const RunConfig rc = build_run_config(j, d);
  CHECK(d.ok());
  CHECK(rc.claim.payment_steps == std::vector<int>{2, 4, 6});
  CHECK(rc.costs.form == CostForm::linear);
}

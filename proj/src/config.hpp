// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: JSON file with full-line '#' comments, dotted-key
// overrides, defaults and validation.

#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "costs.hpp"
#include "game_engine.hpp"
#include "market_model.hpp"
#include "solver.hpp"
#include "valuation.hpp"

namespace csg {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverMode { game, symmetric, zero_sum_banal };
SolverMode parse_solver_mode(const std::string& s);
const char* to_string(SolverMode m);

struct ValuationSpec {
  CleanMethod clean_method = CleanMethod::automatic;
  int degree = 2;
  Conditioning conditioning = Conditioning::regression;
};

struct OutputSpec {
  std::string dir = "out";
  bool paths = true;
  bool exposures = true;
  bool costs = true;
  bool policies = false;
  bool regimes = true;
};

struct RunConfig {
  std::string scenario;
  ModelParams model;
  ClaimSpec claim;
  CollateralSpec collateral;
  CostSetup costs;
  ValuationSpec valuation;
  GameSpec game;
  SolverConfig solver;
  SolverMode solver_mode = SolverMode::game;
  OutputSpec outputs;
  nlohmann::json resolved;  // defaults merged with the user's file and overrides
};

struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
  nlohmann::json to_json() const;
};

nlohmann::json default_config();

// Parses config text; full-line '#' comments are ignored. Errors carry the
// line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin = "config");
nlohmann::json read_config_file(const std::string& path);

// Applies "a.b.c=value"; value is read as JSON, else taken as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);
void set_dotted(nlohmann::json& cfg, const std::string& key, const nlohmann::json& value);

// Merges `user` over the defaults and converts it. Every problem found is
// recorded in `diag`; the returned config is only usable when diag.ok().
RunConfig build_run_config(const nlohmann::json& user, Diagnostics& diag, const std::string& run_mode = "");

Diagnostics validate_config(const nlohmann::json& user, const std::string& run_mode = "");

}  // namespace csg

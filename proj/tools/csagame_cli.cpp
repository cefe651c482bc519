// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 invalid or unreadable configuration, 3 equilibrium not certified.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "csagame/csagame.h"

namespace {

int exit_code(csg_status s) {
  switch (s) {
    case CSG_OK: return 0;
    case CSG_ERR_CONFIG:
    case CSG_ERR_PARSE: return 2;
    default: return 1;
  }
}

int report(csg_status s, const char* what) {
  std::cerr << "csagame: " << what << ": " << csg_last_error() << "\n";
  return exit_code(s);
}

struct EngineGuard {
  csg_engine* e = nullptr;
  ~EngineGuard() { csg_engine_destroy(e); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Valuation and equilibrium search for the contingent-CSA switching game"};
  app.set_version_flag("--version", std::string(csg_version()));

  const std::vector<std::string> modes = {"simulate", "value",     "game",    "symmetric",
                                          "oracle",   "residuals", "validate"};
  std::string positional, mode, config, out;
  std::vector<std::string> sets;
  long long seed = -1;

  app.add_option("command", positional, "mode, optionally preceded by 'run'")
      ->check(CLI::IsMember([&] {
        auto m = modes;
        m.push_back("run");
        return m;
      }()));
  app.add_option("--mode,-m", mode, "simulate|value|game|symmetric|oracle|residuals|validate")
      ->check(CLI::IsMember(modes));
  app.add_option("--config,-c", config, "config file (JSON, '#' comment lines allowed)")->required();
  app.add_option("--seed", seed, "override model.seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out,-o", out, "output directory (overrides outputs.dir)");
  app.add_option("--set", sets, "override a dotted key, e.g. --set costs.A.c_to0=0.05")->take_all();
  app.allow_extras(false);

  // "csagame run --mode game ..." and "csagame game ..." are equivalent.
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args.front() == "run") args.erase(args.begin());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (mode.empty()) mode = positional == "run" ? "" : positional;
  if (mode.empty()) {
    std::cerr << "csagame: no mode given (use --mode or a positional mode)\n";
    return 2;
  }

  EngineGuard g;
  if (csg_status s = csg_engine_create_from_file(config.c_str(), &g.e); s != CSG_OK) return report(s, "config");
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "csagame: --set expects key=value, got '" << kv << "'\n";
      return 2;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (csg_status s = csg_engine_set(g.e, key.c_str(), value.c_str()); s != CSG_OK) return report(s, "--set");
  }
  if (seed >= 0) csg_engine_set(g.e, "model.seed", std::to_string(seed).c_str());

  char* diag = nullptr;
  const csg_status vs = csg_engine_validate(g.e, mode.c_str(), &diag);
  if (mode == "validate" || vs != CSG_OK) {
    if (diag) std::cout << diag << "\n";
    csg_string_free(diag);
    return exit_code(vs);
  }
  csg_string_free(diag);

  int outcome = 0;
  if (csg_status s = csg_engine_run(g.e, mode.c_str(), out.empty() ? nullptr : out.c_str(), &outcome); s != CSG_OK)
    return report(s, mode.c_str());
  char* summary = nullptr;
  if (csg_engine_result_json(g.e, &summary) == CSG_OK) std::cout << summary << "\n";
  csg_string_free(summary);
  return outcome;
}

// SPDX-License-Identifier: Apache-2.0
//
// The shared library through its C header only, and the command line.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "csagame/csagame.h"

namespace fs = std::filesystem;

namespace {

const std::string kData = CSAGAME_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csagame_capi_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CSAGAME_CLI + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct Engine {
  csg_engine* e = nullptr;
  ~Engine() { csg_engine_destroy(e); }
};

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::string(csg_version()).size() > 0);
  Engine g;
  CHECK(csg_engine_create_from_json("{ not json", &g.e) == CSG_ERR_PARSE);
  CHECK(g.e == nullptr);
  CHECK(std::string(csg_last_error()).size() > 0);
  CHECK(csg_engine_create_from_json("[1, 2]", &g.e) == CSG_ERR_PARSE);
  CHECK(csg_engine_create_from_file((kData + "/missing.json").c_str(), &g.e) != CSG_OK);
  CHECK(csg_engine_create_from_json(nullptr, &g.e) == CSG_ERR_ARGUMENT);
  csg_engine_destroy(nullptr);
  csg_string_free(nullptr);
}

TEST_CASE("validation diagnostics") {
  Engine g;
  REQUIRE(csg_engine_create_from_file((kData + "/bad_correlation.json").c_str(), &g.e) == CSG_OK);
  char* diag = nullptr;
  CHECK(csg_engine_validate(g.e, "game", &diag) == CSG_ERR_CONFIG);
  REQUIRE(diag != nullptr);
  CHECK(std::string(diag).find("errors") != std::string::npos);
  csg_string_free(diag);

  for (const char* k : {"model.rho.x_lA", "model.rho.x_lB", "model.rho.lA_lB"})
    CHECK(csg_engine_set(g.e, k, "0.1") == CSG_OK);
  CHECK(csg_engine_validate(g.e, "game", nullptr) == CSG_OK);
}

TEST_CASE("a run produces the result summary and files with fixed schemas") {
  Engine g;
  REQUIRE(csg_engine_create_from_file((kData + "/tiny.json").c_str(), &g.e) == CSG_OK);
  char* out = nullptr;
  CHECK(csg_engine_result_json(g.e, &out) == CSG_ERR_STATE);
  CHECK(csg_engine_run(g.e, "no_such_mode", nullptr, nullptr) != CSG_OK);

  const fs::path dir = scratch("game");
  int outcome = -1;
  REQUIRE(csg_engine_run(g.e, "game", dir.c_str(), &outcome) == CSG_OK);
  CHECK((outcome == CSG_OUTCOME_OK || outcome == CSG_OUTCOME_NOT_CERTIFIED));
  REQUIRE(csg_engine_result_json(g.e, &out) == CSG_OK);
  CHECK(std::string(out).find("certificate") != std::string::npos);
  csg_string_free(out);

  const std::map<std::string, std::string> headers = {
      {"paths.csv", "path,step,time,x,lambdaA,lambdaB,bank"},
      {"defaults.csv", "path,tauA,tauB,tau,first,default_step"},
      {"exposure_A.csv", "path,step,time,S_rf,S,cva,dva,bcva,coll"},
      {"exposure_B.csv", "path,step,time,S_rf,S,cva,dva,bcva,coll"},
      {"costs.csv", "player,path,step,time,F0,F1"},
      {"terminal_costs.csv", "player,path,end_step,G0,G1"},
      {"strategies.csv", "player,path,switch_index,step,time,target"},
      {"regimes.csv", "path,step,time,regime,changed,by"},
      {"value_surface.csv", "player,regime,l,step,n_fit,fallback,coefficients"},
      {"policies.csv", "player,path,step,regime,l,elect"},
  };
  for (const auto& [file, header] : headers) {
    INFO(file);
    REQUIRE(fs::exists(dir / file));
    CHECK(first_line(dir / file) == header);
  }
  CHECK(fs::exists(dir / "game_outcome.json"));
  CHECK(fs::exists(dir / "reflection.json"));
  CHECK(first_line(dir / "manifest.txt").rfind("# csagame", 0) == 0);

  char* cfg = nullptr;
  REQUIRE(csg_engine_config_json(g.e, &cfg) == CSG_OK);
  CHECK(std::string(cfg).find("\"n_paths\": 5") != std::string::npos);
  csg_string_free(cfg);
}

TEST_CASE("the manifest reproduces the run") {
  const fs::path a = scratch("m1"), b = scratch("m2");
  REQUIRE(cli("value -c " + kData + "/tiny.json -o " + a.string()) == 0);
  REQUIRE(cli("value -c " + (a / "manifest.txt").string() + " -o " + b.string()) == 0);
  for (const char* f : {"exposure_A.csv", "costs.csv", "value_summary.json"}) {
    std::ifstream fa(a / f), fb(b / f);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
  }
}

TEST_CASE("command-line exit codes") {
  const std::string out = " -o " + scratch("cli").string();
  CHECK(cli("value -c " + kData + "/tiny.json" + out) == 0);
  CHECK(cli("run --mode symmetric -c " + kData + "/tiny.json" + out) == 0);
  CHECK(cli("oracle -c " + kData + "/tiny.json" + out) == 0);
  CHECK(cli("validate -c " + kData + "/tiny.json") == 0);
  CHECK(cli("game -c " + kData + "/cycle.json" + out) == 3);
  CHECK(cli("game -c " + kData + "/bad_correlation.json" + out) == 2);
  CHECK(cli("game -c " + kData + "/unknown_key.json" + out) == 2);
  CHECK(cli("game -c " + kData + "/broken.json" + out) == 2);
  CHECK(cli("game -c " + kData + "/missing.json" + out) == 2);
  CHECK(cli("game -c " + kData + "/tiny.json --set costs.A.delta" + out) == 2);
  CHECK(cli("symmetric -c " + kData + "/tiny.json --set costs.A.delta=0.2" + out) == 2);
  CHECK(cli("bogus -c " + kData + "/tiny.json") == 2);
  CHECK(cli("--version") == 0);
  fs::remove_all(scratch("").parent_path());
}

// SPDX-License-Identifier: Apache-2.0
//
// Mode orchestration and result files.

#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"

namespace csg {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kOutcomeOk = 0;
inline constexpr int kOutcomeNotCertified = 3;

struct RunResult {
  int outcome = kOutcomeOk;
  nlohmann::json summary;
  std::vector<std::string> files;
};

const std::vector<std::string>& run_modes();

// Runs one mode and writes its files under `out_dir` (the config's
// outputs.dir when empty).
RunResult run(const RunConfig& cfg, const std::string& mode, const std::string& out_dir = "");

// Everything the game modes need, built once per run.
struct Prepared {
  PathBundle bundle;
  CleanPrice clean;
  ExposureSurface exposure_A, exposure_B;
  CostSurfaces costs;
};

Prepared prepare(const RunConfig& cfg, bool with_costs = true);
CostRebuild cost_rebuilder(const Prepared& prep, const CostSetup& setup);

}  // namespace csg

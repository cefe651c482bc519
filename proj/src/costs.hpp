// SPDX-License-Identifier: Apache-2.0
//
// Running, terminal and switching costs of the two players, tabulated per
// path, grid step and regime.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "market_model.hpp"
#include "valuation.hpp"

namespace csg {

struct PlayerCostParams {
  double delta = 0.0;
  // Cost of a switch into regime 0 / 1: one value for the whole grid, or one
  // value per grid step.
  std::vector<double> c_to0{0.0};
  std::vector<double> c_to1{0.0};
  FundingSpec funding;

  double c(int target, int k) const;
  // Smallest switching cost over the grid (the Hp3 floor).
  double c_floor(int n_steps) const;
  std::vector<std::string> diagnostics(Player who, int n_steps) const;
};

enum class CostForm { quadratic, linear };
enum class DeltaMode { constant, response };
CostForm parse_cost_form(const std::string& s);
DeltaMode parse_delta_mode(const std::string& s);
const char* to_string(CostForm f);
const char* to_string(DeltaMode m);

struct CostSetup {
  std::array<PlayerCostParams, 2> player;  // indexed by Player
  CostForm form = CostForm::quadratic;
  DeltaMode delta_mode = DeltaMode::constant;

  const PlayerCostParams& of(Player p) const { return player[static_cast<std::size_t>(index(p))]; }
};

// R^i(t): -exp(-(s - bp) t) when posting (npv < 0), exp(-(pi - bp) t) when
// receiving (npv > 0), 0 at npv = 0. Only defined under collateral.
double funding_factor(double t, int regime, double npv, const FundingSpec& f);

// (BCVA - delta)^2
double regime1_running_cost(double bcva, double delta);
// (funding_integral - |npv| - delta)^2, funding_integral ~ R * npv * dt.
double regime0_running_cost(double funding_integral, double npv, double delta);
// (-npv - delta)^2 with collateral, delta^2 without.
double terminal_cost(bool collateral_active, double npv, double delta);
// c * B_0 / B_k, zero at or after maturity.
double switching_cost(double c, double bank_k, bool before_maturity = true);

// Threshold applied to each player's cost per path and grid step, for the
// response mode. for_player[i] holds delta^{-i}.
struct DeltaField {
  std::array<std::vector<double>, 2> for_player;
};

class CostSurfaces {
 public:
  int n_paths = 0;
  int n_steps = 0;
  std::vector<double> grid;
  std::vector<double> bank;
  std::vector<int> end_step;
  CostSetup setup;
  // [player][regime], one entry per path and grid step; steps at or after
  // the path's end step are zero.
  std::array<std::array<std::vector<double>, 2>, 2> F;
  // [player][regime], one entry per path: cost at T ^ tau given the regime
  // prevailing there.
  std::array<std::array<std::vector<double>, 2>, 2> G;

  double dt(int k) const { return grid[static_cast<std::size_t>(k) + 1] - grid[static_cast<std::size_t>(k)]; }
  double running(Player i, int z, int p, int k) const {
    return F[static_cast<std::size_t>(index(i))][static_cast<std::size_t>(z)][cell(p, k)];
  }
  double terminal(Player i, int z, int p) const {
    return G[static_cast<std::size_t>(index(i))][static_cast<std::size_t>(z)][static_cast<std::size_t>(p)];
  }
  // Discounted cost charged to i for a regime change into `target` at step k.
  double switching(Player i, int target, int k) const {
    return switching_cost(setup.of(i).c(target, k), bank[static_cast<std::size_t>(k)], k < n_steps);
  }
  int end(int p) const { return end_step[static_cast<std::size_t>(p)]; }
  std::size_t cell(int p, int k) const {
    return static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k);
  }
};

// Player i's costs read its own exposure surface and the opponent's delta
// (constant mode) or `deltas` (response mode, when given).
CostSurfaces build_cost_surfaces(const PathBundle& bundle, const ExposureSurface& exposure_A,
                                 const ExposureSurface& exposure_B, const CostSetup& setup,
                                 const DeltaField* deltas = nullptr);

// Violations of the symmetric-game hypotheses: zero deltas, equal switching
// costs, equal funding with s = pi, and a positive switching-cost floor.
std::vector<std::string> symmetry_diagnostics(const CostSetup& setup, int n_steps);

}  // namespace csg

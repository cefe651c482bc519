// SPDX-License-Identifier: Apache-2.0
//
// Hand-built cost surfaces for small game instances.

#pragma once

#include <random>

#include "costs.hpp"
#include "market_model.hpp"

namespace csg::testing {

// All costs zero, no defaults, flat rates.
inline CostSurfaces blank_costs(int n_paths, int n_steps, double c = 0.0) {
  CostSurfaces cs;
  cs.n_paths = n_paths;
  cs.n_steps = n_steps;
  cs.grid = uniform_grid(1.0, n_steps);
  cs.bank.assign(static_cast<std::size_t>(n_steps) + 1, 1.0);
  cs.end_step.assign(static_cast<std::size_t>(n_paths), n_steps);
  for (auto& p : cs.setup.player) {
    p.c_to0 = {c};
    p.c_to1 = {c};
  }
  const auto cells = static_cast<std::size_t>(n_paths) * static_cast<std::size_t>(n_steps + 1);
  for (auto& pl : cs.F)
    for (auto& v : pl) v.assign(cells, 0.0);
  for (auto& pl : cs.G)
    for (auto& v : pl) v.assign(static_cast<std::size_t>(n_paths), 0.0);
  return cs;
}

// Random nonnegative costs; symmetric copies B's tables from A's.
inline CostSurfaces random_costs(std::mt19937_64& rng, int n_paths, int n_steps, bool symmetric) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CostSurfaces cs = blank_costs(n_paths, n_steps, 0.05 + 0.2 * u(rng));
  if (!symmetric) cs.setup.player[1].c_to0 = cs.setup.player[1].c_to1 = {0.05 + 0.2 * u(rng)};
  for (int p = 0; p < n_paths; ++p) {
    cs.end_step[static_cast<std::size_t>(p)] = u(rng) < 0.25 ? 1 + static_cast<int>(u(rng) * n_steps) : n_steps;
    if (cs.end_step[static_cast<std::size_t>(p)] > n_steps) cs.end_step[static_cast<std::size_t>(p)] = n_steps;
    for (int i = 0; i < 2; ++i)
      for (int z = 0; z < 2; ++z) {
        if (symmetric && i == 1) continue;
        for (int k = 0; k < cs.end(p); ++k) cs.F[i][z][cs.cell(p, k)] = u(rng);
        cs.G[i][z][static_cast<std::size_t>(p)] = u(rng);
      }
  }
  if (symmetric) {
    cs.F[1] = cs.F[0];
    cs.G[1] = cs.G[0];
  }
  return cs;
}

}  // namespace csg::testing

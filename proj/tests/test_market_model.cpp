// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "market_model.hpp"

using namespace csg;

namespace {

ModelParams quiet_model() {
  ModelParams m;
  m.x0 = 1.0;
  m.lambdaA0 = 0.1;
  m.lambdaB0 = 0.1;
  m.T = 1.0;
  m.n_steps = 10;
  m.n_paths = 50;
  m.seed = 3;
  return m;
}

}  // namespace

TEST_CASE("zero noise keeps every state at its initial value") {
  const PathBundle b = simulate_paths(quiet_model());
  for (int p = 0; p < b.n_paths(); ++p) {
    for (int k = 0; k <= b.n_steps(); ++k) {
      CHECK(b.x(p, k) == 1.0);
      CHECK(b.lamA(p, k) == 0.1);
      CHECK(b.lamB(p, k) == 0.1);
      CHECK(b.bank(k) == 1.0);
    }
    CHECK(cumulative_intensity(b, Player::A, p, b.n_steps()) == doctest::Approx(0.1).epsilon(1e-14));
  }
}

TEST_CASE("bank account and discount factors") {
  const auto grid = uniform_grid(1.0, 4);
  const auto bank = bank_account(ShortRate::flat(0.02), grid);
  CHECK(bank.back() == doctest::Approx(std::exp(0.02)).epsilon(1e-14));
  CHECK(bank.front() == 1.0);

  // Piecewise-linear rate against its exact integral.
  ShortRate r{{0.0, 0.5, 1.0}, {0.01, 0.05, 0.03}};
  const auto b2 = bank_account(r, grid);
  auto integral = [](double t) {
    if (t <= 0.5) return 0.01 * t + 0.04 * t * t;
    const double u = t - 0.5;
    return 0.015 + 0.05 * u - 0.02 * u * u;
  };
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(std::log(b2[k]) - integral(grid[k])) < 1e-12);

  ModelParams m = quiet_model();
  m.r = ShortRate::flat(0.02);
  const PathBundle b = simulate_paths(m);
  CHECK(b.discount(0, b.n_steps()) == doctest::Approx(std::exp(-0.02)).epsilon(1e-14));
  CHECK(b.discount(3, 3) == 1.0);
}

TEST_CASE("correlation factor reproduces the matrix and rejects non-PSD input") {
  std::array<std::array<double, 3>, 3> c{{{1.0, 0.5, 0.2}, {0.5, 1.0, 0.3}, {0.2, 0.3, 1.0}}};
  auto f = correlation_factor(c);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int q = 0; q < 3; ++q) s += f[i][q] * f[j][q];
      CHECK(s == doctest::Approx(c[i][j]).epsilon(1e-14));
    }

  // Rank one is fine.
  std::array<std::array<double, 3>, 3> ones{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
  CHECK_NOTHROW(correlation_factor(ones));

  std::array<std::array<double, 3>, 3> bad{{{1.0, 0.9, -0.9}, {0.9, 1.0, 0.9}, {-0.9, 0.9, 1.0}}};
  CHECK_THROWS_AS(correlation_factor(bad), ConfigError);

  ModelParams m = quiet_model();
  m.rho_x_lA = 0.9;
  m.rho_x_lB = -0.9;
  m.rho_lA_lB = 0.9;
  CHECK_FALSE(m.diagnostics().empty());
}

TEST_CASE("cox default time interpolates the crossing") {
  const auto grid = uniform_grid(1.0, 2);
  std::vector<double> lam{0.2, 0.2, 0.2};
  CHECK(cox_default_time(lam, grid, 0.1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cox_default_time(lam, grid, 0.15) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(cox_default_time(lam, grid, 0.25) == kNever);
}

TEST_CASE("default and end steps") {
  PathBundle b(2, uniform_grid(1.0, 4));
  b.set_default_times(0, 0.3, kNever);
  CHECK(b.default_step(0) == 2);
  CHECK(b.end_step(0) == 2);
  CHECK(b.first_to_default(Player::A, 0));
  CHECK(b.alive(0, 1));
  CHECK_FALSE(b.alive(0, 2));
  CHECK(b.default_step(1) == 5);
  CHECK(b.end_step(1) == 4);
  CHECK_FALSE(b.defaulted(1));
}

TEST_CASE("simulation is reproducible and independent of the thread count") {
  ModelParams m = quiet_model();
  m.sigma = Coefficient::constant(0.3);
  m.nu = Coefficient::constant(0.5);
  m.eta = Coefficient::constant(0.4);
  m.rho_x_lA = 0.3;
  m.n_paths = 300;
  const PathBundle a = simulate_paths(m);
  m.threads = 4;
  const PathBundle b = simulate_paths(m);
  CHECK(a == b);
  m.seed = 4;
  CHECK_FALSE(a == simulate_paths(m));
  for (int p = 0; p < a.n_paths(); ++p)
    for (int k = 0; k <= a.n_steps(); ++k) CHECK(a.lamA(p, k) >= 0.0);
}

TEST_CASE("empirical default probability matches exponential survival") {
  ModelParams m = quiet_model();
  m.lambdaB0 = 0.0;
  m.n_paths = 20000;
  const PathBundle b = simulate_paths(m);
  int hits = 0;
  for (int p = 0; p < b.n_paths(); ++p) hits += b.tauA(p) <= 1.0 ? 1 : 0;
  const double ph = static_cast<double>(hits) / b.n_paths();
  const double se = std::sqrt(ph * (1 - ph) / b.n_paths());
  CHECK(std::abs(ph - (1 - std::exp(-0.1))) < 3 * se);
}

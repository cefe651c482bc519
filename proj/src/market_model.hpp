// SPDX-License-Identifier: Apache-2.0
//
// Joint dynamics of the price factor X and the two default intensities,
// deterministic savings account and Cox-construction default times.

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

enum class Player : int { A = 0, B = 1 };

constexpr Player other(Player p) { return p == Player::A ? Player::B : Player::A; }
constexpr int index(Player p) { return static_cast<int>(p); }
inline const char* name(Player p) { return p == Player::A ? "A" : "B"; }

// Coefficient family used in the lognormal-style SDEs: a + b * state.
struct Coefficient {
  enum class Kind { constant, affine };
  Kind kind = Kind::constant;
  double a = 0.0;
  double b = 0.0;

  static Coefficient constant(double v) { return {Kind::constant, v, 0.0}; }
  static Coefficient affine(double a, double b) { return {Kind::affine, a, b}; }

  double operator()(double state) const { return kind == Kind::constant ? a : a + b * state; }
  bool is_constant() const { return kind == Kind::constant || b == 0.0; }
};

// Deterministic short rate: flat, or piecewise-linear through knots with
// flat extrapolation.
struct ShortRate {
  std::vector<double> times;
  std::vector<double> rates;

  static ShortRate flat(double r) { return {{0.0}, {r}}; }
  double operator()(double t) const;
  bool is_flat() const;
};

struct ModelParams {
  double x0 = 1.0;
  double lambdaA0 = 0.0;
  double lambdaB0 = 0.0;
  Coefficient mu;     // drift of X
  Coefficient sigma;  // vol of X
  Coefficient gamma;  // drift of lambda^A
  Coefficient nu;     // vol of lambda^A
  Coefficient chi;    // drift of lambda^B
  Coefficient eta;    // vol of lambda^B
  double rho_x_lA = 0.0;
  double rho_x_lB = 0.0;
  double rho_lA_lB = 0.0;
  ShortRate r = ShortRate::flat(0.0);
  double T = 1.0;
  int n_steps = 10;
  int n_paths = 1000;
  std::uint64_t seed = 1;
  int threads = 1;

  // Driver order: (W^x, W^lambdaA, W^lambdaB).
  std::array<std::array<double, 3>, 3> correlation() const;
  // Every violated invariant, empty when the parameters are usable.
  std::vector<std::string> diagnostics() const;
};

// Factor F with F F^T = C, from a pivoted LDL^T so that PSD but
// rank-deficient matrices are accepted (F is a row permutation of a lower
// triangular matrix). Throws ConfigError when C is not PSD.
std::array<std::array<double, 3>, 3> correlation_factor(
    const std::array<std::array<double, 3>, 3>& corr);

class PathBundle {
 public:
  PathBundle() = default;
  PathBundle(int n_paths, std::vector<double> grid);

  int n_paths() const { return n_paths_; }
  int n_steps() const { return static_cast<int>(grid_.size()) - 1; }
  const std::vector<double>& grid() const { return grid_; }
  double t(int k) const { return grid_[static_cast<std::size_t>(k)]; }
  double dt(int k) const { return grid_[static_cast<std::size_t>(k) + 1] - grid_[static_cast<std::size_t>(k)]; }
  double maturity() const { return grid_.back(); }

  double x(int p, int k) const { return x_[at(p, k)]; }
  double lamA(int p, int k) const { return lamA_[at(p, k)]; }
  double lamB(int p, int k) const { return lamB_[at(p, k)]; }
  double lam(Player who, int p, int k) const { return who == Player::A ? lamA(p, k) : lamB(p, k); }
  std::span<const double> x_path(int p) const { return row(x_, p); }

  const std::vector<double>& bank() const { return bank_; }
  double bank(int k) const { return bank_[static_cast<std::size_t>(k)]; }

  double tauA(int p) const { return tauA_[static_cast<std::size_t>(p)]; }
  double tauB(int p) const { return tauB_[static_cast<std::size_t>(p)]; }
  double tau_of(Player who, int p) const { return who == Player::A ? tauA(p) : tauB(p); }
  double tau(int p) const;
  // Who defaulted first, if anyone did before T.
  bool defaulted(int p) const { return tau(p) <= maturity(); }
  bool first_to_default(Player who, int p) const;

  // First grid index with t_k >= tau (n_steps + 1 when no default).
  int default_step(int p) const;
  // min(default_step, n_steps): the step where the contract stops.
  int end_step(int p) const;
  // H_t = 1{tau <= t_k}
  int H(int p, int k) const { return tau(p) <= t(k) ? 1 : 0; }
  // Path still alive at t_k (tau > t_k).
  bool alive(int p, int k) const { return tau(p) > t(k); }

  // B_t / B_s for t_index <= s_index; identical on every path because the
  // short rate is deterministic.
  double discount(int t_index, int s_index) const;

  // Mutable access for the simulator and for hand-built test bundles.
  double& x_ref(int p, int k) { return x_[at(p, k)]; }
  double& lamA_ref(int p, int k) { return lamA_[at(p, k)]; }
  double& lamB_ref(int p, int k) { return lamB_[at(p, k)]; }
  std::vector<double>& bank_ref() { return bank_; }
  void set_default_times(int p, double tauA, double tauB);

  bool operator==(const PathBundle&) const = default;

 private:
  std::size_t at(int p, int k) const {
    return static_cast<std::size_t>(p) * grid_.size() + static_cast<std::size_t>(k);
  }
  std::span<const double> row(const std::vector<double>& v, int p) const {
    return {v.data() + at(p, 0), grid_.size()};
  }

  int n_paths_ = 0;
  std::vector<double> grid_;
  std::vector<double> x_, lamA_, lamB_;
  std::vector<double> bank_;
  std::vector<double> tauA_, tauB_;
};

// Uniform grid t_k = k T / n.
std::vector<double> uniform_grid(double T, int n_steps);

// Savings account B_{t_k} = exp(trapezoid integral of r) on the grid.
std::vector<double> bank_account(const ShortRate& r, const std::vector<double>& grid);

// First time the trapezoidal cumulative intensity crosses `threshold`,
// linearly interpolated inside the crossing step; kNever if it stays below
// up to the last grid point.
double cox_default_time(std::span<const double> intensity, const std::vector<double>& grid,
                        double threshold);

// Lambda^i_{t_k} by trapezoidal accumulation along one path.
double cumulative_intensity(const PathBundle& bundle, Player who, int p, int k);

PathBundle simulate_paths(const ModelParams& params);

}  // namespace csg

// SPDX-License-Identifier: Apache-2.0

#include "market_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "parallel.hpp"

namespace csg {

double ShortRate::operator()(double t) const {
  if (rates.empty()) return 0.0;
  if (rates.size() == 1 || t <= times.front()) return rates.front();
  if (t >= times.back()) return rates.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return rates[i - 1] + w * (rates[i] - rates[i - 1]);
}

bool ShortRate::is_flat() const {
  return std::all_of(rates.begin(), rates.end(), [&](double v) { return v == rates.front(); });
}

std::array<std::array<double, 3>, 3> ModelParams::correlation() const {
  return {{{1.0, rho_x_lA, rho_x_lB}, {rho_x_lA, 1.0, rho_lA_lB}, {rho_x_lB, rho_lA_lB, 1.0}}};
}

std::vector<std::string> ModelParams::diagnostics() const {
  std::vector<std::string> out;
  auto bad = [&](const std::string& m) { out.push_back("model: " + m); };
  if (!(T > 0.0) || !std::isfinite(T)) bad("T must be > 0");
  if (n_steps < 1) bad("n_steps must be >= 1");
  if (n_paths < 1) bad("n_paths must be >= 1");
  if (!(lambdaA0 >= 0.0)) bad("lambdaA0 must be >= 0");
  if (!(lambdaB0 >= 0.0)) bad("lambdaB0 must be >= 0");
  if (!std::isfinite(x0)) bad("x0 must be finite");
  if (threads < 1) bad("threads must be >= 1");
  for (auto [nm, v] : {std::pair{"rho_x_lA", rho_x_lA}, {"rho_x_lB", rho_x_lB}, {"rho_lA_lB", rho_lA_lB}}) {
    if (!(v >= -1.0 && v <= 1.0)) bad(std::string(nm) + " must lie in [-1, 1]");
  }
  if (r.times.size() != r.rates.size() || r.rates.empty()) {
    bad("short rate curve needs matching, non-empty times and rates");
  } else if (!std::is_sorted(r.times.begin(), r.times.end()) ||
             std::adjacent_find(r.times.begin(), r.times.end()) != r.times.end()) {
    bad("short rate knot times must be strictly increasing");
  }
  try {
    correlation_factor(correlation());
  } catch (const ConfigError& e) {
    bad(e.what());
  }
  return out;
}

std::array<std::array<double, 3>, 3> correlation_factor(
    const std::array<std::array<double, 3>, 3>& corr) {
  Eigen::Matrix3d c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = corr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  constexpr double tol = 1e-12;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c);
  if (eig.eigenvalues().minCoeff() < -tol) {
    std::ostringstream os;
    os << "correlation matrix [[" << c(0, 0) << ", " << c(0, 1) << ", " << c(0, 2) << "], [" << c(1, 0)
       << ", " << c(1, 1) << ", " << c(1, 2) << "], [" << c(2, 0) << ", " << c(2, 1) << ", " << c(2, 2)
       << "]] is not positive semi-definite (min eigenvalue " << eig.eigenvalues().minCoeff() << ")";
    throw ConfigError(os.str());
  }

  // P^T L D L^T P = C
  Eigen::LDLT<Eigen::Matrix3d> ldlt(c);
  Eigen::Matrix3d L = ldlt.matrixL();
  Eigen::Vector3d d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::Matrix3d factor = ldlt.transpositionsP().transpose() * (L * d.asDiagonal());

  std::array<std::array<double, 3>, 3> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = factor(i, j);
  return out;
}

PathBundle::PathBundle(int n_paths, std::vector<double> grid)
    : n_paths_(n_paths), grid_(std::move(grid)) {
  const auto cells = static_cast<std::size_t>(n_paths_) * grid_.size();
  x_.assign(cells, 0.0);
  lamA_.assign(cells, 0.0);
  lamB_.assign(cells, 0.0);
  bank_.assign(grid_.size(), 1.0);
  tauA_.assign(static_cast<std::size_t>(n_paths_), kNever);
  tauB_.assign(static_cast<std::size_t>(n_paths_), kNever);
}

double PathBundle::tau(int p) const { return std::min(tauA(p), tauB(p)); }

bool PathBundle::first_to_default(Player who, int p) const {
  const double mine = tau_of(who, p);
  return mine <= maturity() && mine <= tau_of(other(who), p) &&
         // simultaneous defaults are attributed to A
         !(who == Player::B && tauA(p) == tauB(p));
}

int PathBundle::default_step(int p) const {
  const double tp = tau(p);
  if (!(tp <= maturity())) return n_steps() + 1;
  const auto it = std::lower_bound(grid_.begin(), grid_.end(), tp);
  return static_cast<int>(it - grid_.begin());
}

int PathBundle::end_step(int p) const { return std::min(default_step(p), n_steps()); }

double PathBundle::discount(int t_index, int s_index) const {
  if (t_index < 0 || s_index > n_steps() || t_index > s_index) {
    std::ostringstream os;
    os << "discount: need 0 <= t_index <= s_index <= " << n_steps() << ", got (" << t_index << ", "
       << s_index << ")";
    throw std::out_of_range(os.str());
  }
  return bank(t_index) / bank(s_index);
}

void PathBundle::set_default_times(int p, double tA, double tB) {
  tauA_[static_cast<std::size_t>(p)] = tA;
  tauB_[static_cast<std::size_t>(p)] = tB;
}

std::vector<double> uniform_grid(double T, int n_steps) {
  std::vector<double> g(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) g[static_cast<std::size_t>(k)] = T * k / n_steps;
  g.back() = T;
  return g;
}

std::vector<double> bank_account(const ShortRate& r, const std::vector<double>& grid) {
  std::vector<double> b(grid.size(), 1.0);
  double integral = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    integral += 0.5 * (r(grid[k - 1]) + r(grid[k])) * (grid[k] - grid[k - 1]);
    b[k] = std::exp(integral);
  }
  return b;
}

double cox_default_time(std::span<const double> intensity, const std::vector<double>& grid,
                        double threshold) {
  if (threshold <= 0.0) return grid.front();
  double cum = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double inc = 0.5 * (intensity[k - 1] + intensity[k]) * (grid[k] - grid[k - 1]);
    if (cum + inc >= threshold && inc > 0.0) {
      return grid[k - 1] + (threshold - cum) / inc * (grid[k] - grid[k - 1]);
    }
    cum += inc;
  }
  return kNever;
}

double cumulative_intensity(const PathBundle& bundle, Player who, int p, int k) {
  double cum = 0.0;
  for (int j = 1; j <= k; ++j) cum += 0.5 * (bundle.lam(who, p, j - 1) + bundle.lam(who, p, j)) * bundle.dt(j - 1);
  return cum;
}

namespace {

std::mt19937_64 path_rng(std::uint64_t seed, int path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

PathBundle simulate_paths(const ModelParams& params) {
  if (auto diag = params.diagnostics(); !diag.empty()) throw ConfigError(diag.front());
  const auto L = correlation_factor(params.correlation());

  PathBundle bundle(params.n_paths, uniform_grid(params.T, params.n_steps));
  bundle.bank_ref() = bank_account(params.r, bundle.grid());
  const int n = params.n_steps;

  std::vector<std::string> failures(static_cast<std::size_t>(params.n_paths));
  parallel_for(params.n_paths, params.threads, [&](int begin, int end) {
    std::vector<double> lamA(static_cast<std::size_t>(n) + 1), lamB(static_cast<std::size_t>(n) + 1);
    for (int p = begin; p < end; ++p) {
      auto rng = path_rng(params.seed, p);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::exponential_distribution<double> expo(1.0);
      const double thresholdA = expo(rng);
      const double thresholdB = expo(rng);

      double x = params.x0, la = params.lambdaA0, lb = params.lambdaB0;
      bundle.x_ref(p, 0) = x;
      bundle.lamA_ref(p, 0) = la;
      bundle.lamB_ref(p, 0) = lb;
      for (int k = 0; k < n; ++k) {
        const double h = bundle.dt(k);
        const double sq = std::sqrt(h);
        const double z0 = gauss(rng), z1 = gauss(rng), z2 = gauss(rng);
        const double w0 = L[0][0] * z0 + L[0][1] * z1 + L[0][2] * z2;
        const double w1 = L[1][0] * z0 + L[1][1] * z1 + L[1][2] * z2;
        const double w2 = L[2][0] * z0 + L[2][1] * z1 + L[2][2] * z2;

        const double nx = x + params.mu(x) * x * h + params.sigma(x) * x * sq * w0;
        const double na = la + params.gamma(la) * la * h + params.nu(la) * la * sq * w1;
        const double nb = lb + params.chi(lb) * lb * h + params.eta(lb) * lb * sq * w2;
        if (!std::isfinite(nx) || !std::isfinite(na) || !std::isfinite(nb)) {
          std::ostringstream os;
          os << "non-finite state on path " << p << " at step " << (k + 1);
          failures[static_cast<std::size_t>(p)] = os.str();
          break;
        }
        x = nx;
        la = std::max(na, 0.0);
        lb = std::max(nb, 0.0);
        bundle.x_ref(p, k + 1) = x;
        bundle.lamA_ref(p, k + 1) = la;
        bundle.lamB_ref(p, k + 1) = lb;
      }
      if (!failures[static_cast<std::size_t>(p)].empty()) continue;
      for (int k = 0; k <= n; ++k) {
        lamA[static_cast<std::size_t>(k)] = bundle.lamA(p, k);
        lamB[static_cast<std::size_t>(k)] = bundle.lamB(p, k);
      }
      bundle.set_default_times(p, cox_default_time(lamA, bundle.grid(), thresholdA),
                               cox_default_time(lamB, bundle.grid(), thresholdB));
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw SimulationError(f);
  return bundle;
}

}  // namespace csg

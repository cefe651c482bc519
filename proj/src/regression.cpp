// SPDX-License-Identifier: Apache-2.0

#include "regression.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace csg {

Conditioning parse_conditioning(const std::string& s) {
  if (s == "regression") return Conditioning::regression;
  if (s == "pathwise") return Conditioning::pathwise;
  if (s == "state_atoms") return Conditioning::state_atoms;
  throw std::invalid_argument("unknown conditioning mode '" + s + "'");
}

const char* to_string(Conditioning c) {
  switch (c) {
    case Conditioning::regression: return "regression";
    case Conditioning::pathwise: return "pathwise";
    case Conditioning::state_atoms: return "state_atoms";
  }
  return "?";
}

namespace {

void monomials(int n_vars, int degree, std::vector<int>& cur, int var, int left,
               std::vector<std::vector<int>>& out) {
  if (var == n_vars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= left; ++e) {
    cur[static_cast<std::size_t>(var)] = e;
    monomials(n_vars, degree, cur, var + 1, left - e, out);
  }
  cur[static_cast<std::size_t>(var)] = 0;
}

std::vector<std::vector<int>> all_monomials(int n_vars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(n_vars), 0);
  monomials(n_vars, degree, cur, 0, degree, out);
  return out;
}

Eigen::MatrixXd design(const RegressionFit& fit, const Eigen::MatrixXd& states) {
  const auto n = states.rows();
  Eigen::MatrixXd d(n, static_cast<Eigen::Index>(fit.exponents.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < fit.exponents.size(); ++j) {
      double v = 1.0;
      for (std::size_t c = 0; c < fit.exponents[j].size(); ++c) {
        const int e = fit.exponents[j][c];
        if (e == 0) continue;
        const double z = (states(i, static_cast<Eigen::Index>(c)) - fit.mean[c]) / fit.scale[c];
        for (int q = 0; q < e; ++q) v *= z;
      }
      d(i, static_cast<Eigen::Index>(j)) = v;
    }
  }
  return d;
}

}  // namespace

int basis_size(int n_vars, int degree) {
  return static_cast<int>(all_monomials(n_vars, degree).size());
}

RegressionFit fit_regression(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, int degree) {
  RegressionFit fit;
  const auto n = states.rows();
  const auto v = states.cols();
  fit.n_fit = static_cast<int>(n);
  fit.mean.assign(static_cast<std::size_t>(v), 0.0);
  fit.scale.assign(static_cast<std::size_t>(v), 0.0);
  if (n == 0) throw std::invalid_argument("regression on an empty path set");

  std::vector<int> kept;
  for (Eigen::Index c = 0; c < v; ++c) {
    const double m = states.col(c).mean();
    const double s = std::sqrt((states.col(c).array() - m).square().mean());
    fit.mean[static_cast<std::size_t>(c)] = m;
    if (s > 1e-12 * (1.0 + std::abs(m))) {
      fit.scale[static_cast<std::size_t>(c)] = s;
      kept.push_back(static_cast<int>(c));
    }
  }
  for (const auto& e : all_monomials(static_cast<int>(kept.size()), degree)) {
    std::vector<int> full(static_cast<std::size_t>(v), 0);
    for (std::size_t i = 0; i < kept.size(); ++i) full[static_cast<std::size_t>(kept[i])] = e[i];
    fit.exponents.push_back(std::move(full));
  }

  auto mean_only = [&] {
    fit.fallback = fit.exponents.size() > 1;
    fit.exponents.assign(1, std::vector<int>(static_cast<std::size_t>(v), 0));
    fit.coef = targets.colwise().mean();
    return fit;
  };
  if (fit.exponents.size() == 1 || n < static_cast<Eigen::Index>(fit.exponents.size())) return mean_only();

  const Eigen::MatrixXd d = design(fit, states);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
  qr.setThreshold(1e-10);
  if (qr.rank() < d.cols()) return mean_only();
  fit.coef = qr.solve(targets);
  return fit;
}

Eigen::MatrixXd predict(const RegressionFit& fit, const Eigen::MatrixXd& states) {
  return design(fit, states) * fit.coef;
}

Eigen::MatrixXd state_atom_means(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets) {
  std::map<std::vector<double>, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(states.cols()));
    for (Eigen::Index c = 0; c < states.cols(); ++c) key[static_cast<std::size_t>(c)] = states(i, c);
    groups[key].push_back(i);
  }
  Eigen::MatrixXd out(targets.rows(), targets.cols());
  for (const auto& [key, rows] : groups) {
    Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(targets.cols());
    for (auto r : rows) m += targets.row(r);
    m /= static_cast<double>(rows.size());
    for (auto r : rows) out.row(r) = m;
  }
  return out;
}

Eigen::MatrixXd conditional_expectation(Conditioning mode, const Eigen::MatrixXd& states,
                                        const Eigen::MatrixXd& targets, int degree,
                                        RegressionFit* fit_out) {
  switch (mode) {
    case Conditioning::pathwise: return targets;
    case Conditioning::state_atoms: return state_atom_means(states, targets);
    case Conditioning::regression: {
      RegressionFit fit = fit_regression(states, targets, degree);
      Eigen::MatrixXd out = predict(fit, states);
      // Polynomial tails can leave the range of the data; conditional
      // expectations cannot.
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        out.col(c) = out.col(c).cwiseMax(targets.col(c).minCoeff()).cwiseMin(targets.col(c).maxCoeff());
      if (fit_out) *fit_out = std::move(fit);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace csg

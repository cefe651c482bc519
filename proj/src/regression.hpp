// SPDX-License-Identifier: Apache-2.0
//
// Least-squares estimates of conditional expectations on polynomial bases,
// plus the exact estimators used on tiny bundles.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace csg {

enum class Conditioning {
  regression,   // polynomial least squares in the state variables
  pathwise,     // each path is its own atom: E[Y | F_t] = Y
  state_atoms,  // paths with identical state vectors are pooled
};

Conditioning parse_conditioning(const std::string& s);
const char* to_string(Conditioning c);

// Fitted polynomial in standardized state variables. Variables with zero
// spread on the fit set are dropped; if the design is still rank deficient
// the fit degrades to the sample mean and `fallback` is set.
struct RegressionFit {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a dropped variable
  std::vector<std::vector<int>> exponents;
  Eigen::MatrixXd coef;  // basis x targets
  bool fallback = false;
  int n_fit = 0;
};

// Number of monomials of total degree <= degree in n_vars variables.
int basis_size(int n_vars, int degree);

RegressionFit fit_regression(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, int degree);
Eigen::MatrixXd predict(const RegressionFit& fit, const Eigen::MatrixXd& states);

// Group means over identical state rows.
Eigen::MatrixXd state_atom_means(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets);

// Dispatches on the conditioning mode; returns fitted values row-aligned
// with `targets`. `fit_out`, when given, receives the regression fit.
Eigen::MatrixXd conditional_expectation(Conditioning mode, const Eigen::MatrixXd& states,
                                        const Eigen::MatrixXd& targets, int degree,
                                        RegressionFit* fit_out = nullptr);

}  // namespace csg

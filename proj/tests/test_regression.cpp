// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "regression.hpp"

using namespace csg;

TEST_CASE("basis size counts monomials up to the degree") {
  CHECK(basis_size(3, 0) == 1);
  CHECK(basis_size(3, 1) == 4);
  CHECK(basis_size(3, 2) == 10);
  CHECK(basis_size(1, 3) == 4);
}

TEST_CASE("quadratic targets are reproduced exactly") {
  const int n = 200;
  Eigen::MatrixXd s(n, 2), t(n, 1);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = 0.01 * i;
    s(i, 1) = std::sin(0.37 * i);
    t(i, 0) = 1.0 + 2.0 * s(i, 0) - 3.0 * s(i, 0) * s(i, 1) + 0.5 * s(i, 1) * s(i, 1);
  }
  const auto fit = fit_regression(s, t, 2);
  CHECK_FALSE(fit.fallback);
  const auto pred = predict(fit, s);
  for (int i = 0; i < n; ++i) CHECK(pred(i, 0) == doctest::Approx(t(i, 0)).epsilon(1e-9));
}

TEST_CASE("constant states fall back to the mean") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Ones(5, 3), t(5, 2);
  t << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
  const auto out = conditional_expectation(Conditioning::regression, s, t, 2);
  for (int i = 0; i < 5; ++i) {
    CHECK(out(i, 0) == doctest::Approx(5.0));
    CHECK(out(i, 1) == doctest::Approx(6.0));
  }
}

TEST_CASE("fitted values stay inside the range of the targets") {
  const int n = 100;
  Eigen::MatrixXd s(n, 1), t(n, 1);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = i;
    t(i, 0) = i == n - 1 ? 1000.0 : 0.0;
  }
  const auto out = conditional_expectation(Conditioning::regression, s, t, 2);
  CHECK(out.minCoeff() >= 0.0);
  CHECK(out.maxCoeff() <= 1000.0);
}

TEST_CASE("pathwise and state-atom conditioning") {
  Eigen::MatrixXd s(4, 1), t(4, 1);
  s << 1, 2, 1, 2;
  t << 1, 10, 3, 20;
  CHECK(conditional_expectation(Conditioning::pathwise, s, t, 2) == t);
  const auto a = conditional_expectation(Conditioning::state_atoms, s, t, 2);
  CHECK(a(0, 0) == 2.0);
  CHECK(a(2, 0) == 2.0);
  CHECK(a(1, 0) == 15.0);
  CHECK(a(3, 0) == 15.0);
  CHECK(parse_conditioning("state_atoms") == Conditioning::state_atoms);
  CHECK_THROWS_AS(parse_conditioning("lasso"), std::invalid_argument);
}

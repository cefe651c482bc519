// SPDX-License-Identifier: Apache-2.0

#include "valuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csg {

std::vector<std::string> ClaimSpec::diagnostics(int n_steps) const {
  std::vector<std::string> out;
  auto bad = [&](const std::string& m) { out.push_back("claim: " + m); };
  for (auto [nm, v] : {std::pair{"recovery_A", recovery_A}, {"recovery_B", recovery_B}}) {
    if (!(v >= 0.0 && v <= 1.0)) bad(std::string(nm) + " must lie in [0, 1]");
  }
  if (!std::isfinite(strike) || !std::isfinite(notional)) bad("strike and notional must be finite");
  if (kind == Kind::swap) {
    if (payment_steps.empty()) bad("swap needs at least one payment step");
    for (std::size_t i = 0; i < payment_steps.size(); ++i) {
      const int d = payment_steps[i];
      if (d < 1 || d > n_steps) {
        bad("payment step " + std::to_string(d) + " is not on the grid (1.." + std::to_string(n_steps) + ")");
      }
      if (i > 0 && d <= payment_steps[i - 1]) bad("payment steps must be strictly increasing");
    }
  }
  return out;
}

std::vector<std::string> CollateralSpec::diagnostics() const {
  std::vector<std::string> out;
  if (!(mta >= 0.0)) out.emplace_back("collateral: mta must be >= 0");
  if (!(gammaA <= 0.0)) out.emplace_back("collateral: gammaA must be <= 0");
  if (!(gammaB >= 0.0)) out.emplace_back("collateral: gammaB must be >= 0");
  return out;
}

std::vector<std::string> FundingSpec::warnings(Player who) const {
  std::vector<std::string> out;
  const std::string pre = std::string("funding.") + name(who) + ": ";
  if (!std::isfinite(borrow_spread) || !std::isfinite(remuneration_basis) || !std::isfinite(opportunity_premium))
    out.push_back(pre + "spreads must be finite");
  if (borrow_spread < 0.0) out.push_back(pre + "negative borrow spread");
  if (opportunity_premium < 0.0) out.push_back(pre + "negative opportunity premium");
  return out;
}

CleanMethod parse_clean_method(const std::string& s) {
  if (s == "auto") return CleanMethod::automatic;
  if (s == "closed_form") return CleanMethod::closed_form;
  if (s == "regression") return CleanMethod::regression;
  if (s == "state_atoms") return CleanMethod::state_atoms;
  throw std::invalid_argument("unknown clean price method '" + s + "'");
}

const char* to_string(CleanMethod m) {
  switch (m) {
    case CleanMethod::automatic: return "auto";
    case CleanMethod::closed_form: return "closed_form";
    case CleanMethod::regression: return "regression";
    case CleanMethod::state_atoms: return "state_atoms";
  }
  return "?";
}

namespace {

double accrual(const PathBundle& bundle, const ClaimSpec& claim, int d) {
  const auto it = std::lower_bound(claim.payment_steps.begin(), claim.payment_steps.end(), d);
  const int prev = it == claim.payment_steps.begin() ? 0 : *(it - 1);
  return bundle.t(d) - bundle.t(prev);
}

bool pays_at(const ClaimSpec& claim, int d) {
  return std::binary_search(claim.payment_steps.begin(), claim.payment_steps.end(), d);
}

// E[cash_flow(d) | X_k] when X has constant drift.
double expected_flow(const PathBundle& bundle, const ClaimSpec& claim, double drift, double xk, int k, int d) {
  double growth = 1.0;
  for (int j = k; j < d; ++j) growth *= 1.0 + drift * bundle.dt(j);
  const double fwd = xk * growth - claim.strike;
  switch (claim.kind) {
    case ClaimSpec::Kind::zero: return 0.0;
    case ClaimSpec::Kind::forward: return d == bundle.n_steps() ? claim.notional * fwd : 0.0;
    case ClaimSpec::Kind::swap: return pays_at(claim, d) ? claim.notional * accrual(bundle, claim, d) * fwd : 0.0;
  }
  return 0.0;
}

}  // namespace

double cash_flow(const PathBundle& bundle, const ClaimSpec& claim, int p, int d) {
  const double diff = bundle.x(p, d) - claim.strike;
  switch (claim.kind) {
    case ClaimSpec::Kind::zero: return 0.0;
    case ClaimSpec::Kind::forward: return d == bundle.n_steps() ? claim.notional * diff : 0.0;
    case ClaimSpec::Kind::swap: return pays_at(claim, d) ? claim.notional * accrual(bundle, claim, d) * diff : 0.0;
  }
  return 0.0;
}

CleanPrice clean_price(const PathBundle& bundle, const ClaimSpec& claim, const CleanPriceOptions& opts) {
  if (auto diag = claim.diagnostics(bundle.n_steps()); !diag.empty()) throw ConfigError(diag.front());
  const int n = bundle.n_steps();
  const int np = bundle.n_paths();
  CleanPrice out;
  out.n_paths = np;
  out.n_steps = n;
  out.value.assign(static_cast<std::size_t>(np) * static_cast<std::size_t>(n + 1), 0.0);
  auto cell = [&](int p, int k) -> double& {
    return out.value[static_cast<std::size_t>(p) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k)];
  };

  CleanMethod method = opts.method;
  if (method == CleanMethod::automatic) {
    if (opts.drift.is_constant()) method = CleanMethod::closed_form;
    else if (np >= 10 * basis_size(1, opts.degree)) method = CleanMethod::regression;
    else method = CleanMethod::state_atoms;
  }
  if (method == CleanMethod::closed_form && !opts.drift.is_constant())
    throw ConfigError("closed-form clean price needs a constant drift for X");
  if (method == CleanMethod::regression && np < 10 * basis_size(1, opts.degree)) {
    std::ostringstream os;
    os << "clean price regression is ill-conditioned: " << np << " paths for a basis of size "
       << basis_size(1, opts.degree) << " (need at least 10x)";
    throw NumericError(os.str());
  }
  out.method = method;

  for (int p = 0; p < np; ++p) cell(p, n) = cash_flow(bundle, claim, p, n);

  if (method == CleanMethod::closed_form) {
    const double drift = opts.drift(0.0);
    for (int p = 0; p < np; ++p) {
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int d = k + 1; d <= n; ++d)
          v += bundle.discount(k, d) * expected_flow(bundle, claim, drift, bundle.x(p, k), k, d);
        cell(p, k) = v;
      }
    }
    return out;
  }

  // Regress the pathwise discounted future flows on X_k.
  Eigen::MatrixXd states(np, 1);
  Eigen::MatrixXd target(np, 1);
  std::vector<double> future(static_cast<std::size_t>(np), 0.0);
  for (int p = 0; p < np; ++p) future[static_cast<std::size_t>(p)] = cash_flow(bundle, claim, p, n);
  for (int k = n - 1; k >= 0; --k) {
    const double disc = bundle.discount(k, k + 1);
    for (int p = 0; p < np; ++p) {
      states(p, 0) = bundle.x(p, k);
      target(p, 0) = disc * future[static_cast<std::size_t>(p)];
    }
    RegressionFit fit;
    const Conditioning mode =
        method == CleanMethod::regression ? Conditioning::regression : Conditioning::state_atoms;
    const Eigen::MatrixXd fitted = conditional_expectation(mode, states, target, opts.degree, &fit);
    if (mode == Conditioning::regression && fit.fallback) ++out.fallbacks;
    for (int p = 0; p < np; ++p) {
      cell(p, k) = fitted(p, 0);
      future[static_cast<std::size_t>(p)] = target(p, 0) + cash_flow(bundle, claim, p, k);
    }
  }
  return out;
}

double threshold_collateral(double s_rf, const CollateralSpec& spec) {
  double c = 0.0;
  if (s_rf > spec.gammaB + spec.mta) c += s_rf - spec.gammaB;
  if (s_rf < spec.gammaA - spec.mta) c += s_rf - spec.gammaA;
  return c;
}

std::vector<double> collateral(const PathBundle& bundle, const ExposureSurface& surface,
                               const CollateralSpec& spec) {
  if (surface.n_paths != bundle.n_paths() || surface.n_steps != bundle.n_steps())
    throw std::invalid_argument("collateral: surface shape does not match the bundle");
  // A's view mirrors the thresholds: its positive exposure is B's negative one.
  CollateralSpec view = spec;
  if (surface.perspective == Player::A) {
    view.gammaA = -spec.gammaB;
    view.gammaB = -spec.gammaA;
  }
  auto amount = [&](double s) {
    switch (spec.mode) {
      case CollateralSpec::Mode::zero: return 0.0;
      case CollateralSpec::Mode::perfect: return s;
      case CollateralSpec::Mode::thresholded: return threshold_collateral(s, view);
    }
    return 0.0;
  };
  std::vector<double> out(surface.s_rf.size(), 0.0);
  for (int p = 0; p < surface.n_paths; ++p) {
    const int kd = surface.default_step[static_cast<std::size_t>(p)];
    for (int k = 0; k <= surface.n_steps; ++k) {
      if (k < kd) out[surface.at(p, k)] = amount(surface.get(surface.s_rf, p, k));
      else if (k == kd) out[surface.at(p, k)] = amount(surface.npv_end[static_cast<std::size_t>(p)]);
    }
  }
  return out;
}

ExposureSurface exposure(const PathBundle& bundle, const ClaimSpec& claim, const CleanPrice& clean,
                         const CollateralSpec& collateral_spec, Player perspective, const ExposureOptions& opts) {
  if (clean.n_paths != bundle.n_paths() || clean.n_steps != bundle.n_steps())
    throw std::invalid_argument("exposure: clean price shape does not match the bundle");
  const int n = bundle.n_steps();
  const int np = bundle.n_paths();
  const double sign = perspective == Player::B ? 1.0 : -1.0;
  const Player self = perspective;
  const Player cpty = other(perspective);

  ExposureSurface s;
  s.perspective = perspective;
  s.n_paths = np;
  s.n_steps = n;
  const auto cells = static_cast<std::size_t>(np) * static_cast<std::size_t>(n + 1);
  s.s_rf.assign(cells, 0.0);
  s.s.assign(cells, 0.0);
  s.cva.assign(cells, 0.0);
  s.dva.assign(cells, 0.0);
  s.bcva.assign(cells, 0.0);
  s.npv_end.assign(static_cast<std::size_t>(np), 0.0);
  s.end_step.assign(static_cast<std::size_t>(np), n);
  s.default_step.assign(static_cast<std::size_t>(np), n + 1);

  // Pathwise discounted losses, in time-0 units.
  std::vector<double> loss_cva(static_cast<std::size_t>(np), 0.0), loss_dva(static_cast<std::size_t>(np), 0.0);
  for (int p = 0; p < np; ++p) {
    const int kd = bundle.default_step(p);
    s.default_step[static_cast<std::size_t>(p)] = kd;
    s.end_step[static_cast<std::size_t>(p)] = std::min(kd, n);
    for (int k = 0; k <= n && k < kd; ++k) s.s_rf[s.at(p, k)] = sign * clean(p, k);
    if (kd <= n) {
      const double pre = sign * clean(p, std::max(kd - 1, 0));
      s.npv_end[static_cast<std::size_t>(p)] = pre;
      const double df = 1.0 / bundle.bank(kd);
      if (bundle.first_to_default(self, p))
        loss_cva[static_cast<std::size_t>(p)] = df * (1.0 - claim.recovery(self)) * std::max(-pre, 0.0);
      if (bundle.first_to_default(cpty, p))
        loss_dva[static_cast<std::size_t>(p)] = df * (1.0 - claim.recovery(cpty)) * std::max(pre, 0.0);
    } else {
      s.npv_end[static_cast<std::size_t>(p)] = sign * clean(p, n);
    }
  }

  std::vector<int> alive;
  for (int k = 0; k < n; ++k) {
    alive.clear();
    for (int p = 0; p < np; ++p)
      if (bundle.alive(p, k)) alive.push_back(p);
    if (alive.empty()) continue;  // nothing left to value
    const auto m = static_cast<Eigen::Index>(alive.size());
    Eigen::MatrixXd states(m, 3), target(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int p = alive[static_cast<std::size_t>(i)];
      states(i, 0) = bundle.x(p, k);
      states(i, 1) = bundle.lamA(p, k);
      states(i, 2) = bundle.lamB(p, k);
      target(i, 0) = loss_cva[static_cast<std::size_t>(p)];
      target(i, 1) = loss_dva[static_cast<std::size_t>(p)];
    }
    RegressionFit fit;
    const Eigen::MatrixXd fitted = conditional_expectation(opts.conditioning, states, target, opts.degree, &fit);
    if (opts.conditioning == Conditioning::regression && fit.fallback) ++s.regression_fallbacks;
    for (Eigen::Index i = 0; i < m; ++i) {
      const int p = alive[static_cast<std::size_t>(i)];
      const auto c = s.at(p, k);
      s.cva[c] = bundle.bank(k) * fitted(i, 0);
      s.dva[c] = bundle.bank(k) * fitted(i, 1);
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    s.bcva[c] = s.cva[c] - s.dva[c];
    s.s[c] = s.s_rf[c] - s.bcva[c];
  }
  s.coll = collateral(bundle, s, collateral_spec);
  s.loss_cva = std::move(loss_cva);
  s.loss_dva = std::move(loss_dva);
  return s;
}

ContingentSurface contingent_overlay(const ExposureSurface& surface, std::span<const std::uint8_t> regimes) {
  if (regimes.size() != surface.s_rf.size())
    throw std::invalid_argument("contingent_overlay: regime path does not cover every path and grid step");
  ContingentSurface out;
  out.s_c.assign(regimes.size(), 0.0);
  out.bcva_c.assign(regimes.size(), 0.0);
  out.coll_c.assign(regimes.size(), 0.0);
  for (int p = 0; p < surface.n_paths; ++p) {
    const int kd = surface.default_step[static_cast<std::size_t>(p)];
    for (int k = 0; k <= surface.n_steps; ++k) {
      const auto c = surface.at(p, k);
      const std::uint8_t z = regimes[c];
      if (z > 1) {
        std::ostringstream os;
        os << "contingent_overlay: regime undefined on path " << p << " at step " << k;
        throw std::invalid_argument(os.str());
      }
      if (k > kd) continue;
      if (k == kd) {
        if (z == 0) out.coll_c[c] = surface.npv_end[static_cast<std::size_t>(p)];
        continue;
      }
      if (z == 0) {
        out.s_c[c] = surface.s_rf[c];
        out.coll_c[c] = surface.s_rf[c];
      } else {
        out.s_c[c] = surface.s[c];
        out.bcva_c[c] = surface.bcva[c];
      }
    }
  }
  return out;
}

}  // namespace csg

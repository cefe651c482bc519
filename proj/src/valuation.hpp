// SPDX-License-Identifier: Apache-2.0
//
// Clean and risky prices, CVA/DVA/BCVA, threshold collateral and the
// contingent-CSA overlay along a simulated bundle.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "market_model.hpp"
#include "regression.hpp"

namespace csg {

// Contract seen from B; A's view is the negation. Swap legs pay
// notional * accrual * (X_{t_d} - strike) on each payment step d; the forward
// pays notional * (X_T - strike) at maturity.
struct ClaimSpec {
  enum class Kind { zero, forward, swap };
  Kind kind = Kind::forward;
  double strike = 0.0;
  double notional = 1.0;
  std::vector<int> payment_steps;
  double recovery_A = 0.4;
  double recovery_B = 0.4;

  double recovery(Player who) const { return who == Player::A ? recovery_A : recovery_B; }
  std::vector<std::string> diagnostics(int n_steps) const;
};

struct CollateralSpec {
  enum class Mode { zero, perfect, thresholded };
  Mode mode = Mode::perfect;
  double gammaA = 0.0;  // threshold on negative exposure, <= 0
  double gammaB = 0.0;  // threshold on positive exposure, >= 0
  double mta = 0.0;
  std::vector<std::string> diagnostics() const;
};

struct FundingSpec {
  double borrow_spread = 0.0;        // s^i:  r_borr = r + s
  double remuneration_basis = 0.0;   // bp^i: r_rem  = r + bp
  double opportunity_premium = 0.0;  // pi^i: r_opp  = r + pi
  bool operator==(const FundingSpec&) const = default;
  std::vector<std::string> warnings(Player who) const;
};

enum class CleanMethod { automatic, closed_form, regression, state_atoms };
CleanMethod parse_clean_method(const std::string& s);
const char* to_string(CleanMethod m);

// Promised cash flow of the claim at grid step d (seen from B).
double cash_flow(const PathBundle& bundle, const ClaimSpec& claim, int p, int d);

struct CleanPriceOptions {
  CleanMethod method = CleanMethod::automatic;
  int degree = 2;
  // Drift of X; closed form is available only when it is constant.
  Coefficient drift = Coefficient::constant(0.0);
};

// S_rf per path and grid step, from B's side. S_rf(t_k) values the flows in
// ]t_k, T]; at maturity it holds the flow due at T.
struct CleanPrice {
  int n_paths = 0;
  int n_steps = 0;
  std::vector<double> value;
  CleanMethod method = CleanMethod::automatic;
  int fallbacks = 0;
  double operator()(int p, int k) const {
    return value[static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k)];
  }
};

CleanPrice clean_price(const PathBundle& bundle, const ClaimSpec& claim, const CleanPriceOptions& opts = {});

struct ExposureOptions {
  Conditioning conditioning = Conditioning::regression;
  int degree = 2;
};

// Per-path, per-step processes from one counterparty's perspective. Values
// vanish strictly after the default step; at the default step only the
// collateral (frozen at the last pre-default clean value) survives.
struct ExposureSurface {
  Player perspective = Player::B;
  int n_paths = 0;
  int n_steps = 0;
  std::vector<double> s_rf, s, cva, dva, bcva, coll;
  // Clean value where the contract stops: S_rf(T) for survivors, the last
  // pre-default value otherwise.
  std::vector<double> npv_end;
  std::vector<int> end_step;
  std::vector<int> default_step;
  // Pathwise time-0 discounted losses behind CVA_0 and DVA_0.
  std::vector<double> loss_cva, loss_dva;
  int regression_fallbacks = 0;

  std::size_t at(int p, int k) const {
    return static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(k);
  }
  double get(const std::vector<double>& v, int p, int k) const { return v[at(p, k)]; }
};

// CVA^i_t = B_t E[1{t < tau = tau_i <= T} B_tau^-1 (1 - R_i) (S^i_rf)^- | G_t]
// DVA^i_t = B_t E[1{t < tau = tau_-i <= T} B_tau^-1 (1 - R_-i) (S^i_rf)^+ | G_t]
// with S^B_rf = S_rf and S^A_rf = -S_rf, exposure taken at the last grid point
// strictly before tau. Conditional expectations are taken over paths alive
// at t_k, on (X, lambda^A, lambda^B).
ExposureSurface exposure(const PathBundle& bundle, const ClaimSpec& claim, const CleanPrice& clean,
                         const CollateralSpec& collateral, Player perspective,
                         const ExposureOptions& opts = {});

// Collateral account per the CSA thresholds, from B's side for the given
// clean value: 1{S > G_B + MTA}(S - G_B) + 1{S < G_A - MTA}(S - G_A).
double threshold_collateral(double s_rf, const CollateralSpec& spec);

// Collateral process for one perspective: Eq-9 values before default, the
// frozen pre-default value on the default step, zero afterwards.
std::vector<double> collateral(const PathBundle& bundle, const ExposureSurface& surface,
                               const CollateralSpec& spec);

struct ContingentSurface {
  std::vector<double> s_c, bcva_c, coll_c;
};

// Splices the surface by regime: 0 = full collateral (S^C = S_rf, BCVA^C = 0,
// Coll^C = S_rf), 1 = no collateral (S^C = S, BCVA^C = BCVA, Coll^C = 0).
// `regimes` holds one entry per path and grid step.
ContingentSurface contingent_overlay(const ExposureSurface& surface, std::span<const std::uint8_t> regimes);

}  // namespace csg

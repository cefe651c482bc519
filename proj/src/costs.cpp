// SPDX-License-Identifier: Apache-2.0

#include "costs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csg {

namespace {

double curve_at(const std::vector<double>& v, int k) {
  if (v.size() == 1) return v.front();
  return v.at(static_cast<std::size_t>(k));
}

}  // namespace

double PlayerCostParams::c(int target, int k) const { return curve_at(target == 0 ? c_to0 : c_to1, k); }

double PlayerCostParams::c_floor(int n_steps) const {
  double m = kNever;
  for (int k = 0; k < n_steps; ++k) m = std::min({m, c(0, k), c(1, k)});
  return m;
}

std::vector<std::string> PlayerCostParams::diagnostics(Player who, int n_steps) const {
  std::vector<std::string> out;
  const std::string pre = std::string("costs.") + name(who) + ": ";
  if (!(delta >= 0.0) || !std::isfinite(delta)) out.push_back(pre + "delta must be finite and >= 0");
  for (auto [nm, v] : {std::pair{"c_to0", &c_to0}, {"c_to1", &c_to1}}) {
    if (v->size() != 1 && v->size() != static_cast<std::size_t>(n_steps + 1)) {
      std::ostringstream os;
      os << pre << nm << " needs 1 or " << n_steps + 1 << " values, got " << v->size();
      out.push_back(os.str());
      continue;
    }
    for (double c : *v) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        out.push_back(pre + nm + " must be finite and >= 0");
        break;
      }
    }
  }
  return out;
}

CostForm parse_cost_form(const std::string& s) {
  if (s == "quadratic") return CostForm::quadratic;
  if (s == "linear") return CostForm::linear;
  throw std::invalid_argument("unknown cost form '" + s + "'");
}

DeltaMode parse_delta_mode(const std::string& s) {
  if (s == "constant") return DeltaMode::constant;
  if (s == "response") return DeltaMode::response;
  throw std::invalid_argument("unknown delta mode '" + s + "'");
}

const char* to_string(CostForm f) { return f == CostForm::quadratic ? "quadratic" : "linear"; }
const char* to_string(DeltaMode m) { return m == DeltaMode::constant ? "constant" : "response"; }

double funding_factor(double t, int regime, double npv, const FundingSpec& f) {
  if (regime != 0) throw std::logic_error("funding factor is only defined while collateral is active");
  if (npv < 0.0) return -std::exp(-(f.borrow_spread - f.remuneration_basis) * t);
  if (npv > 0.0) return std::exp(-(f.opportunity_premium - f.remuneration_basis) * t);
  return 0.0;
}

double regime1_running_cost(double bcva, double delta) {
  const double d = bcva - delta;
  return d * d;
}

double regime0_running_cost(double funding_integral, double npv, double delta) {
  const double d = funding_integral - std::abs(npv) - delta;
  return d * d;
}

double terminal_cost(bool collateral_active, double npv, double delta) {
  const double d = collateral_active ? -npv - delta : -delta;
  return d * d;
}

double switching_cost(double c, double bank_k, bool before_maturity) {
  return before_maturity ? c / bank_k : 0.0;
}

CostSurfaces build_cost_surfaces(const PathBundle& bundle, const ExposureSurface& exposure_A,
                                 const ExposureSurface& exposure_B, const CostSetup& setup,
                                 const DeltaField* deltas) {
  const int n = bundle.n_steps();
  const int np = bundle.n_paths();
  for (const auto* e : {&exposure_A, &exposure_B}) {
    if (e->n_paths != np || e->n_steps != n || e->bcva.empty())
      throw std::invalid_argument("cost surfaces need exposure surfaces for both players on the bundle");
  }
  if (exposure_A.perspective != Player::A || exposure_B.perspective != Player::B)
    throw std::invalid_argument("cost surfaces: exposure perspectives are swapped");

  CostSurfaces cs;
  cs.n_paths = np;
  cs.n_steps = n;
  cs.grid = bundle.grid();
  cs.bank = bundle.bank();
  cs.end_step = exposure_A.end_step;
  cs.setup = setup;
  const auto cells = static_cast<std::size_t>(np) * static_cast<std::size_t>(n + 1);

  for (Player i : {Player::A, Player::B}) {
    const auto ii = static_cast<std::size_t>(index(i));
    const ExposureSurface& ex = i == Player::A ? exposure_A : exposure_B;
    const FundingSpec& fund = setup.of(i).funding;
    const double delta_const = setup.of(other(i)).delta;
    const std::vector<double>* field = nullptr;
    if (deltas && !deltas->for_player[ii].empty()) {
      if (deltas->for_player[ii].size() != cells) throw std::invalid_argument("delta field has the wrong shape");
      field = &deltas->for_player[ii];
    }
    auto& F0 = cs.F[ii][0];
    auto& F1 = cs.F[ii][1];
    F0.assign(cells, 0.0);
    F1.assign(cells, 0.0);
    cs.G[ii][0].assign(static_cast<std::size_t>(np), 0.0);
    cs.G[ii][1].assign(static_cast<std::size_t>(np), 0.0);

    for (int p = 0; p < np; ++p) {
      const int end = cs.end(p);
      for (int k = 0; k < end; ++k) {
        const auto c = cs.cell(p, k);
        const double delta = field ? (*field)[c] : delta_const;
        const double npv = ex.s_rf[c];
        if (setup.form == CostForm::quadratic) {
          const double integral = funding_factor(bundle.t(k), 0, npv, fund) * npv * bundle.dt(k);
          F0[c] = regime0_running_cost(integral, npv, delta);
          F1[c] = regime1_running_cost(ex.bcva[c], delta);
        } else {
          F0[c] = -delta;
          F1[c] = ex.bcva[c] - delta;
        }
      }
      const double delta = field ? (*field)[cs.cell(p, end)] : delta_const;
      const double npv = ex.npv_end[static_cast<std::size_t>(p)];
      if (setup.form == CostForm::quadratic) {
        cs.G[ii][0][static_cast<std::size_t>(p)] = terminal_cost(true, npv, delta);
        cs.G[ii][1][static_cast<std::size_t>(p)] = terminal_cost(false, npv, delta);
      } else {
        cs.G[ii][0][static_cast<std::size_t>(p)] = -npv - delta;
        cs.G[ii][1][static_cast<std::size_t>(p)] = -delta;
      }
    }
  }
  return cs;
}

std::vector<std::string> symmetry_diagnostics(const CostSetup& setup, int n_steps) {
  std::vector<std::string> out;
  const auto& a = setup.of(Player::A);
  const auto& b = setup.of(Player::B);
  if (a.delta != 0.0 || b.delta != 0.0) out.emplace_back("symmetric: costs.A.delta and costs.B.delta must be 0");
  for (int k = 0; k < n_steps; ++k) {
    if (a.c(0, k) != b.c(0, k) || a.c(1, k) != b.c(1, k)) {
      out.emplace_back("symmetric: switching costs of A and B differ");
      break;
    }
  }
  if (!(a.funding == b.funding)) out.emplace_back("symmetric: funding of A and B differs");
  for (Player i : {Player::A, Player::B}) {
    const auto& f = setup.of(i).funding;
    if (f.borrow_spread != f.opportunity_premium)
      out.push_back(std::string("symmetric: funding.") + name(i) +
                    " needs borrow_spread == opportunity_premium");
  }
  if (setup.form != CostForm::quadratic) out.emplace_back("symmetric: cost form must be quadratic");
  if (setup.delta_mode != DeltaMode::constant) out.emplace_back("symmetric: delta mode must be constant");
  for (Player i : {Player::A, Player::B}) {
    const double floor = setup.of(i).c_floor(n_steps);
    if (!(floor > 0.0)) {
      std::ostringstream os;
      os << "Hp3: min switching cost of " << name(i) << " is " << floor << ", needs to be > 0";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace csg

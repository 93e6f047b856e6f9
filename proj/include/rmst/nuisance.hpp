#pragma once

#include <span>
#include <vector>

#include "rmst/data.hpp"
#include "rmst/grid.hpp"
#include "rmst/logistic.hpp"

namespace rmst {

// Fitted nuisance surfaces evaluated on the sample: event hazard
// h(m, a, W_i) for m in 1..tau-1, censoring hazard g_R(m, a, W_i) for m in
// 0..tau-2, treatment probability g_A(1, W_i), and the survivor products
// S(t, a, W_i), G(t, a, W_i) for t in 0..tau-1. The products are derived
// state: call refresh() after touching a hazard grid.
//
// Hazards may be exactly 0 on empty-risk-set cells (the curves stay flat
// there); elsewhere they live inside the clamp bounds, so logits stay
// finite.
struct NuisanceBundle {
  int tau = 2;
  Grid3 h;        // slots 1..tau-1 used
  Grid3 g_r;      // slots 0..tau-2 used
  std::vector<double> g_a1;
  Grid3 surv;     // S(t,a,W_i), t = 0..tau-1
  Grid3 cens;     // G(t,a,W_i), t = 0..tau-1

  int n() const { return h.n; }
  double g_a(int arm, int subject) const {
    return arm == 1 ? g_a1[subject] : 1.0 - g_a1[subject];
  }

  static NuisanceBundle allocate(int n, int tau);

  // Recomputes surv and cens from the hazard grids.
  void refresh();

  // q[m] = sum_{t=m}^{tau-1} S(t,a,W_i)/S(m,a,W_i), m = 0..tau-1, computed
  // from hazard products so it stays finite when S hits zero.
  void suffix_survival_ratios(int subject, int arm,
                              std::span<double> q) const;

  // Marginal survival S(t,a) = mean_i S(t,a,W_i) for t = 0..tau-1.
  std::vector<double> marginal_survival(int arm) const;
};

// Marginal (covariate-free) nuisance values for the Kaplan-Meier influence
// function: one shared set of curves per arm plus a scalar g_A.
struct MarginalBundle {
  int tau = 2;
  std::vector<double> h[2];     // slots 1..tau-1
  std::vector<double> surv[2];  // t = 0..tau-1
  std::vector<double> cens[2];  // t = 0..tau-1
  double g_a1 = 0.5;

  double g_a(int arm) const { return arm == 1 ? g_a1 : 1.0 - g_a1; }
};

// Kaplan-Meier empirical hazards and censoring products for one dataset.
MarginalBundle marginal_bundle_km(const Dataset& ds, int tau);

// Broadcast of a marginal bundle to per-subject grids (for comparing the
// covariate-free special case against the general machinery).
NuisanceBundle broadcast_marginal(const MarginalBundle& mb, int n);

}  // namespace rmst

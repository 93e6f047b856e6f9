#pragma once

#include <vector>

#include "rmst/data.hpp"
#include "rmst/nuisance.hpp"

namespace rmst {

// Auxiliary covariate Z_a(m, A, W): zero unless A == a_target, otherwise
// minus the tail sum of survival ratios over the inverse treatment and
// censoring probabilities. Valid for m in 1..tau-1.
double aux_z(const NuisanceBundle& b, int subject, int a_target,
             int a_observed, int m);

// Auxiliary covariate H(m, A, W) for the censoring fluctuation, m in
// 0..tau-2.
double aux_h(const NuisanceBundle& b, int subject, int a_observed, int m);

// Auxiliary covariate M(W) for the treatment fluctuation.
double aux_m(const NuisanceBundle& b, int subject);

// Value of the efficient influence function at one observation.
struct EifValue {
  double martingale = 0.0;  // sum_m I_m Z (L_m - h)
  double plug_in = 0.0;     // sum_m S(m,1,W) - S(m,0,W)
  double theta = 0.0;
  double total() const { return martingale + plug_in - theta; }
};

EifValue eval_eif(const NuisanceBundle& b, const Dataset& ds, int subject,
                  double theta);

// Influence function of the Kaplan-Meier estimator, evaluated with marginal
// nuisance values; the literal double sum over t then m.
double eval_d_km(const MarginalBundle& mb, const SubjectRecord& rec,
                 int k_max);

// Score-space component subtracted from the adjusted-IPW influence function
// by the fluctuations: M(W)(A - g_A(1,W)) + sum_m J_m H (R_m - g_R).
double eval_d_car(const NuisanceBundle& b, const Dataset& ds, int subject);

// Closed-form augmented IPW estimate: the estimating equation is linear in
// theta, so the solution is the sample mean of the augmented terms. The
// literal double sum (outer m, inner t) is used here, independent of
// eval_eif's tail-sum route.
double theta_aipw(const NuisanceBundle& b, const Dataset& ds);

}  // namespace rmst

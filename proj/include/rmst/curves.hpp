#pragma once

#include <span>
#include <vector>

#include "rmst/data.hpp"
#include "rmst/grid.hpp"

namespace rmst {

enum class CurveSource { KaplanMeier, Ipw, AdjIpw, Aipw, Substitution };

const char* curve_source_name(CurveSource s);

// Marginal survival values S(t), t = 0..tau-1, with S(0) = 1. Product-limit
// and substitution curves are monotone; IPW curves may not be and carry the
// flag instead of being isotonized.
struct SurvivalCurve {
  int arm = 0;
  CurveSource source = CurveSource::KaplanMeier;
  std::vector<double> values;
  bool monotone = true;

  int tau() const { return static_cast<int>(values.size()); }
};

// Censoring survivor values G(t) = P(C >= t), t = 0..tau, with G(0) = 1.
struct CensoringCurve {
  int arm = 0;
  std::vector<double> values;
};

// Product-limit estimator of P(T > t) within one arm; an empty risk set
// contributes hazard zero (the curve stays flat).
SurvivalCurve km_survival(const Dataset& ds, int arm, int tau);

// Product-limit estimator of P(C >= t) within one arm, values t = 0..tau.
CensoringCurve km_censoring(const Dataset& ds, int arm, int tau);

// S(t) = prod_{m=1..t} (1 - h[m]); h is indexed by its own time (slot 0
// unused), so h needs at least tau entries. Output has tau entries.
std::vector<double> survival_from_hazard(std::span<const double> h, int tau);

// G(t) = prod_{m=0..t-1} (1 - g[m]); g needs at least tau-1 entries.
// Output has tau entries, t = 0..tau-1, with G(0) = 1.
std::vector<double> censoring_from_hazard(std::span<const double> g, int tau);

// Sum of the curve values over t = 0..tau-1 (discrete-time area under S).
double rmst_from_curve(const SurvivalCurve& curve);
double rmst_from_values(std::span<const double> values);

struct ThetaByCurves {
  double theta = 0.0;
  SurvivalCurve curve1, curve0;
  double rmst1 = 0.0, rmst0 = 0.0;
  bool positivity_warning = false;
};

// Kaplan-Meier estimate of the RMST difference at horizon tau.
ThetaByCurves theta_km(const Dataset& ds, int tau);

// Unadjusted IPW with Kaplan-Meier censoring weights and the sample arm
// proportion for g_A. Throws numeric_error when a needed weight denominator
// is exactly zero (degenerate censoring weights).
ThetaByCurves theta_ipw_unadjusted(const Dataset& ds, int tau);

// Adjusted IPW: cens holds model-based G(t, a, W_i) for t = 0..tau-1 and
// g_a1 the fitted P(A=1 | W_i). A required denominator below 1e-6 sets the
// positivity warning on the result.
ThetaByCurves theta_ipw_adjusted(const Dataset& ds,
                                 std::span<const double> g_a1,
                                 const Grid3& cens, int tau);

}  // namespace rmst

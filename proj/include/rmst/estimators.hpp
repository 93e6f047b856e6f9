#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmst/curves.hpp"
#include "rmst/data.hpp"
#include "rmst/tmle.hpp"

namespace rmst {

enum class EstimatorKind { KM, IpwUnadjusted, IpwAdjusted, Aipw, Tmle };

const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& name);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::KM;
  int tau = 2;
  std::string h_spec;   // empty -> dataset default
  std::string gr_spec;
  std::string ga_spec;
  ClampBounds clamp;
  int max_outer_iterations = 50;
  double convergence_scale = 1e-4;
  bool allow_unsaturated_gr = false;
  bool want_se = true;       // skip influence-function SEs in bulk runs
  bool keep_bundle = false;  // retain nuisance surfaces for diagnostics

  TmleConfig tmle() const;
};

struct EstimateResult {
  EstimatorKind kind = EstimatorKind::KM;
  double theta = 0.0;
  double rmst1 = 0.0, rmst0 = 0.0;
  SurvivalCurve curve1, curve0;
  std::optional<double> se;  // absent when no plug-in variance applies
  std::string se_reason;     // why se is absent / caveated
  bool positivity_warning = false;
  bool ridge_used = false;
  bool converged = true;     // TMLE targeting loop state
  int iterations = 0;
  double mean_eif = 0.0;
  std::vector<double> eif_values;  // per subject, when want_se
  std::optional<NuisanceBundle> bundle;
};

// Runs one estimator on a validated dataset. KM and unadjusted IPW share
// the Kaplan-Meier influence function for their plug-in SE; AIPW and TMLE
// use the efficient influence function; adjusted IPW reports no plug-in SE
// (bootstrap covers it).
EstimateResult run_estimator(const Dataset& ds, const EstimatorConfig& cfg);

}  // namespace rmst

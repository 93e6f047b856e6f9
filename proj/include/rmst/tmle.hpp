#pragma once

#include <array>
#include <string>
#include <vector>

#include "rmst/curves.hpp"
#include "rmst/data.hpp"
#include "rmst/design.hpp"
#include "rmst/eif.hpp"
#include "rmst/nuisance.hpp"

namespace rmst {

struct TmleConfig {
  int tau = 2;
  std::string h_spec;   // empty -> default for the dataset's p
  std::string gr_spec;  // must contain saturated(t,a) unless acknowledged
  std::string ga_spec;
  int max_outer_iterations = 50;
  double convergence_scale = 1e-4;  // threshold = scale / n
  // The prediction rule alone can stop while the treatment/censoring
  // updates after the last hazard step still leave a visible empirical
  // EIF mean (the auxiliary covariates carry large leverage at long
  // horizons); iteration also continues until the substitution estimate
  // solves the EIF equation to this tolerance.
  double eif_tolerance = 1e-4;
  ClampBounds clamp;
  bool allow_unsaturated_gr = false;
};

struct TargetStep {
  std::vector<double> coefficients;  // epsilon pair, or gamma / nu alone
  double deviance_before = 0.0;
  double deviance_after = 0.0;
  bool ridge_used = false;
  bool skipped = false;  // no rows to fluctuate on
};

// Reusable row subsets: full-range rows feed the initial fits, the
// tau-restricted rows feed the fluctuations and the convergence measure.
struct TmleWorkspace {
  std::vector<ModelRow> h_rows_full;    // I_m = 1, m = 1..K
  std::vector<ModelRow> h_rows_tau;     // I_m = 1, m = 1..tau-1
  std::vector<ModelRow> gr_rows_full;   // J_m = 1, m = 0..K-1
  std::vector<ModelRow> gr_rows_tau;    // J_m = 1, m = 0..tau-2
};

TmleWorkspace make_tmle_workspace(const Dataset& ds, int tau);

struct InitialFitInfo {
  bool ridge_h = false, ridge_gr = false, ridge_ga = false;
};

// Step 1: working-model fits for h, g_R, g_A evaluated onto the bundle
// grids, with the empirical distribution of W implicit in the subject
// indexing. Hazard cells whose risk set is empty are pinned to zero.
NuisanceBundle fit_initial(const Dataset& ds, const TmleConfig& cfg,
                           const TmleWorkspace& ws,
                           InitialFitInfo* info = nullptr);

// Step 2a: joint two-parameter fluctuation of the event hazard along the
// auxiliary covariates Z_1, Z_0. Mutates the bundle and refreshes products.
TargetStep target_hazard(NuisanceBundle& b, const Dataset& ds,
                         const TmleWorkspace& ws, const TmleConfig& cfg);

// Step 2b: one-parameter fluctuation of the censoring hazard along H.
TargetStep target_censoring(NuisanceBundle& b, const Dataset& ds,
                            const TmleWorkspace& ws, const TmleConfig& cfg);

// Step 2c: one-parameter fluctuation of the treatment probability along M.
TargetStep target_treatment(NuisanceBundle& b, const Dataset& ds,
                            const TmleConfig& cfg);

struct TmleResult {
  double theta_hat = 0.0;
  double rmst1 = 0.0, rmst0 = 0.0;
  SurvivalCurve curve1, curve0;
  int iterations_used = 0;
  bool converged = false;
  double mean_eif = 0.0;
  double se_plugin = 0.0;
  std::vector<std::array<double, 2>> epsilon_history;
  std::vector<double> gamma_history;
  std::vector<double> nu_history;
  bool ridge_anywhere = false;  // caveat flag for plug-in/bootstrap SEs
  NuisanceBundle bundle;        // final targeted surfaces
};

// Full targeting loop: initial fits, iterated 2a/2b/2c updates with the
// products recomputed between sub-steps, stopping when the mean squared
// change of each model's fitted values drops to convergence_scale / n.
TmleResult tmle_fit(const Dataset& ds, const TmleConfig& cfg);

// Targeting loop on an already-fitted bundle (config must be resolved);
// lets callers share the initial fits across estimators.
TmleResult tmle_target(const Dataset& ds, const TmleConfig& cfg,
                       const TmleWorkspace& ws, NuisanceBundle b,
                       bool ridge_initial);

// Resolves empty spec strings to the dataset defaults and validates.
TmleConfig resolve_tmle_config(const Dataset& ds, TmleConfig cfg);

}  // namespace rmst

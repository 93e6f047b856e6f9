#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmst/data.hpp"
#include "rmst/estimators.hpp"

namespace rmst {

enum class CiMethod { WaldPlugin, WaldBootstrap, PercentileBootstrap };

const char* ci_method_name(CiMethod m);

struct InferenceResult {
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
  CiMethod method = CiMethod::WaldPlugin;
  double alpha = 0.05;
  int replicates = 0;       // bootstrap methods only
  std::uint64_t seed = 0;
};

// point +- z_{alpha/2} * se.
InferenceResult wald_ci(double point, double se, double alpha,
                        CiMethod method = CiMethod::WaldPlugin);

struct BootstrapResult {
  InferenceResult wald;        // theta_hat +- z * sd(replicates)
  InferenceResult percentile;  // type-1 empirical quantiles
  std::vector<double> replicate_thetas;  // successful replicates, by index
  int n_failed = 0;
};

// Nonparametric bootstrap over subjects: replicate r resamples n subjects
// with replacement using the stream (seed, r), refits the full estimator,
// and records theta. Failed replicates (estimator hard errors) are dropped
// and counted; more than 10% failures raises numeric_error. `point` is the
// original-sample estimate the Wald interval centers on. Results are
// bit-identical for a given seed regardless of `jobs`.
BootstrapResult bootstrap(const Dataset& ds, const EstimatorConfig& cfg,
                          double point, int B, std::uint64_t seed,
                          double alpha, int jobs);

}  // namespace rmst

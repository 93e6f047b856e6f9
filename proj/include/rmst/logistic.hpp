#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rmst/design.hpp"

namespace rmst {

// Bounds applied to every fitted probability before it is used as a logit
// offset or a weight denominator. Tightening `lo` trades robustness for
// fidelity to boundary (0/1) empirical hazards.
struct ClampBounds {
  double lo = 1e-6;
  double hi() const { return 1.0 - lo; }
  double clamp(double p) const { return std::min(std::max(p, lo), hi()); }
};

inline double expit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct LogisticOptions {
  ClampBounds clamp;
  int max_iterations = 100;
  double deviance_tol = 1e-10;  // |d_new - d_old| <= tol * (1 + |d_new|)
  int max_halvings = 10;
  double ridge = 1e-6;           // fallback penalty
  double alias_tol = 1e-10;      // relative pivot threshold
};

struct LogisticFit {
  std::vector<double> coefficients;
  std::vector<unsigned char> aliased;  // dependent columns, coefficient 0
  bool converged = false;
  bool ridge_used = false;
  double deviance = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  int n_rows_used = 0;
  std::vector<double> deviance_history;
};

// Offset-capable binomial-logistic MLE via iteratively reweighted least
// squares with step-halving. Exactly dependent columns (saturated factor
// blocks) are detected by a deterministic pivot test in natural column
// order and excluded with coefficient zero; boundary fits stall on the
// deviance criterion with probabilities pinned at the clamp. A singular
// solve or non-convergence triggers one ridge-penalized refit.
//
// `offset` may be empty (zeros); `subset` may be empty (all rows), else
// rows with subset[r] == 0 are skipped. Throws numeric_error when the
// subset is empty or the ridge refit also fails.
LogisticFit fit_logistic(const DesignMatrix& X, std::span<const double> y,
                         std::span<const double> offset = {},
                         std::span<const unsigned char> subset = {},
                         const LogisticOptions& opts = {});

// expit(offset + x'beta) clamped to the fit bounds, one value per row.
std::vector<double> predict_prob(const LogisticFit& fit,
                                 const DesignMatrix& X,
                                 std::span<const double> offset = {},
                                 const ClampBounds& clamp = {});

}  // namespace rmst

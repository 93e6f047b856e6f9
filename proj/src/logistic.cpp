#include "rmst/logistic.hpp"

#include <Eigen/Dense>

#include "rmst/errors.hpp"

namespace rmst {

namespace {

// Cholesky with deterministic handling of dependent columns: a pivot that
// collapses relative to its original diagonal marks the column aliased and
// removes it from the factorization (natural order, later columns lose).
// The factor lives in row-major storage so the update dots run contiguous.
// Returns false only if the factor is unusable even after aliasing.
bool solve_aliased(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                   double rel_tol, Eigen::VectorXd* x,
                   std::vector<unsigned char>* aliased) {
  const int p = static_cast<int>(G.rows());
  std::vector<double> L(static_cast<size_t>(p) * p, 0.0);
  auto row = [&](int i) { return L.data() + static_cast<size_t>(i) * p; };
  aliased->assign(p, 0);
  for (int j = 0; j < p; ++j) {
    const double* lj = row(j);
    double s = G(j, j);
    for (int k = 0; k < j; ++k) s -= lj[k] * lj[k];
    const double floor = rel_tol * std::abs(G(j, j));
    if (!(G(j, j) > 0.0) || s <= floor) {
      (*aliased)[j] = 1;
      std::fill(row(j), row(j) + p, 0.0);
      continue;
    }
    const double d = std::sqrt(s);
    row(j)[j] = d;
    for (int i = j + 1; i < p; ++i) {
      const double* li = row(i);
      double v = G(i, j);
      for (int k = 0; k < j; ++k) v -= li[k] * lj[k];
      row(i)[j] = v / d;
    }
  }
  // Forward then back substitution; aliased coordinates stay zero (their
  // factor rows/columns were zeroed, so no masking is needed).
  Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < p; ++i) {
    if ((*aliased)[i]) continue;
    const double* li = row(i);
    double v = b(i);
    for (int k = 0; k < i; ++k) v -= li[k] * z(k);
    z(i) = v / li[i];
    if (!std::isfinite(z(i))) return false;
  }
  x->setZero(p);
  for (int i = p - 1; i >= 0; --i) {
    if ((*aliased)[i]) continue;
    double v = z(i);
    for (int k = i + 1; k < p; ++k) {
      if (!(*aliased)[k]) v -= row(k)[i] * (*x)(k);
    }
    (*x)(i) = v / row(i)[i];
    if (!std::isfinite((*x)(i))) return false;
  }
  return true;
}

struct IrlsResult {
  LogisticFit fit;
  bool ok = false;
};

IrlsResult run_irls(const DesignMatrix& X, std::span<const double> y,
                    std::span<const double> offset,
                    std::span<const unsigned char> subset,
                    const LogisticOptions& opts, double ridge) {
  const int p = X.cols;
  IrlsResult out;
  LogisticFit& fit = out.fit;
  fit.coefficients.assign(p, 0.0);
  fit.ridge_used = ridge > 0.0;

  std::vector<int> rows;
  rows.reserve(X.rows());
  for (int r = 0; r < X.rows(); ++r) {
    if (subset.empty() || subset[r]) rows.push_back(r);
  }
  fit.n_rows_used = static_cast<int>(rows.size());
  if (rows.empty()) throw numeric_error("fit_logistic: empty fit subset");

  // Boundary cells approach the clamp floor geometrically, shedding about
  // 2*lo of deviance per iteration near the end; the stall tolerance must
  // sit below that or tight clamps are never reached.
  const double dev_tol = std::min(opts.deviance_tol, 10.0 * opts.clamp.lo);

  auto off = [&](int r) { return offset.empty() ? 0.0 : offset[r]; };

  const auto nk = static_cast<Eigen::Index>(rows.size());
  Eigen::ArrayXd eta(nk), prob(nk), ylik(nk);
  for (Eigen::Index k = 0; k < nk; ++k) ylik(k) = y[rows[k]];
  auto refresh = [&](std::span<const double> beta) {
    for (Eigen::Index k = 0; k < nk; ++k) {
      const int r = rows[k];
      eta(k) = off(r) + X.row_dot(r, beta);
    }
    if (!eta.isFinite().all()) return false;
    // expit(x) = (1 + tanh(x/2)) / 2, numerically stable and vectorized.
    prob = (0.5 + 0.5 * (0.5 * eta).tanh())
               .max(opts.clamp.lo)
               .min(opts.clamp.hi());
    return true;
  };
  auto deviance_of = [&](std::span<const double> beta) {
    // Per-row likelihood is p for y=1 and 1-p for y=0.
    double dev =
        -2.0 * (ylik * prob + (1.0 - ylik) * (1.0 - prob)).log().sum();
    if (ridge > 0.0) {
      for (int j = 0; j < p; ++j) dev += ridge * beta[j] * beta[j];
    }
    return dev;
  };

  if (!refresh(fit.coefficients)) return out;
  double dev = deviance_of(fit.coefficients);
  fit.deviance_history.push_back(dev);

  // Already-solved fast path: with a concave log-likelihood, a negligible
  // score at the zero start means beta = 0 is the MLE (up to round-off).
  // Boundary-pinned offsets otherwise leave a flat likelihood where the
  // first quadratic step is pure noise.
  {
    std::vector<double> score(p, 0.0), scale(p, 0.0);
    for (Eigen::Index k = 0; k < nk; ++k) {
      const int r = rows[k];
      const double resid = y[r] - prob(k);
      for (int e = X.row_ptr[r]; e < X.row_ptr[r + 1]; ++e) {
        score[X.col_idx[e]] += X.values[e] * resid;
        scale[X.col_idx[e]] += std::abs(X.values[e]);
      }
    }
    bool solved = true;
    double gmax = 0.0;
    for (int j = 0; j < p; ++j) {
      solved = solved && std::abs(score[j]) <= 1e-10 * (1.0 + scale[j]);
      gmax = std::max(gmax, std::abs(score[j]));
    }
    if (solved) {
      fit.converged = true;
      fit.deviance = dev;
      fit.grad_inf_norm = gmax;
      fit.aliased.assign(p, 0);
      out.ok = true;
      return out;
    }
  }

  Eigen::MatrixXd G(p, p);
  Eigen::VectorXd rhs(p);
  std::vector<double> beta_trial(p);

  int no_progress = 0;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    fit.iterations = iter;
    G.setZero();
    rhs.setZero();
    for (Eigen::Index k = 0; k < nk; ++k) {
      const int r = rows[k];
      const double w = prob(k) * (1.0 - prob(k));
      // rhs accumulates x * (w*(eta-offset) + (y-p)): the weighted working
      // response without ever forming (y-p)/w.
      const double wz = w * (eta(k) - off(r)) + (y[r] - prob(k));
      for (int e1 = X.row_ptr[r]; e1 < X.row_ptr[r + 1]; ++e1) {
        const int c1 = X.col_idx[e1];
        const double v1 = X.values[e1];
        rhs(c1) += v1 * wz;
        const double wv1 = w * v1;
        for (int e2 = e1; e2 < X.row_ptr[r + 1]; ++e2) {
          G(X.col_idx[e2], c1) += wv1 * X.values[e2];  // lower triangle
        }
      }
    }
    G = G.selfadjointView<Eigen::Lower>();
    if (ridge > 0.0) {
      for (int j = 0; j < p; ++j) G(j, j) += ridge;
    }

    Eigen::VectorXd beta_new(p);
    if (!solve_aliased(G, rhs, opts.alias_tol, &beta_new, &fit.aliased)) {
      return out;  // caller escalates to ridge / failure
    }

    // Step-halving on the (penalized) deviance.
    double step = 1.0;
    bool accepted = false;
    double dev_new = dev;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (int j = 0; j < p; ++j) {
        beta_trial[j] =
            fit.coefficients[j] + step * (beta_new(j) - fit.coefficients[j]);
      }
      if (refresh(beta_trial)) {
        dev_new = deviance_of(beta_trial);
        if (std::isfinite(dev_new) &&
            dev_new <= dev * (1.0 + 1e-12) + 1e-12) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No acceptable step: the current iterate is the numerical optimum.
      refresh(fit.coefficients);
      fit.converged = true;
      break;
    }
    fit.coefficients = beta_trial;
    fit.deviance_history.push_back(dev_new);
    const double slack = dev_tol * (1.0 + std::abs(dev_new));
    const bool material = dev_new < dev - slack;
    const bool monotone_stall = dev_new <= dev && !material;
    no_progress = material ? 0 : no_progress + 1;
    dev = dev_new;
    // A monotone step below the tolerance is the classic stall; round-off
    // wiggles on a boundary plateau can sit slightly above the old value,
    // so three consecutive non-improving iterations also terminate.
    if (monotone_stall || no_progress >= 3) {
      fit.converged = true;
      break;
    }
  }

  fit.deviance = dev;
  // Unpenalized score at the final coefficients, for diagnostics/tests.
  Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
  for (Eigen::Index k = 0; k < nk; ++k) {
    const int r = rows[k];
    const double resid = y[r] - prob(k);
    for (int e = X.row_ptr[r]; e < X.row_ptr[r + 1]; ++e) {
      score(X.col_idx[e]) += X.values[e] * resid;
    }
  }
  fit.grad_inf_norm = score.size() > 0 ? score.cwiseAbs().maxCoeff() : 0.0;
  if (fit.aliased.empty()) fit.aliased.assign(p, 0);
  out.ok = true;
  for (double c : fit.coefficients) {
    if (!std::isfinite(c)) out.ok = false;
  }
  return out;
}

}  // namespace

LogisticFit fit_logistic(const DesignMatrix& X, std::span<const double> y,
                         std::span<const double> offset,
                         std::span<const unsigned char> subset,
                         const LogisticOptions& opts) {
  IrlsResult res = run_irls(X, y, offset, subset, opts, 0.0);
  if (res.ok && res.fit.converged) return res.fit;

  IrlsResult ridge = run_irls(X, y, offset, subset, opts, opts.ridge);
  if (ridge.ok) {
    ridge.fit.ridge_used = true;
    return ridge.fit;
  }
  if (res.ok) return res.fit;  // unconverged but finite beats nothing
  throw numeric_error("fit_logistic: IRLS failed even with ridge fallback");
}

std::vector<double> predict_prob(const LogisticFit& fit,
                                 const DesignMatrix& X,
                                 std::span<const double> offset,
                                 const ClampBounds& clamp) {
  if (static_cast<int>(fit.coefficients.size()) != X.cols) {
    throw numeric_error("predict_prob: design/coefficient dimension mismatch");
  }
  std::vector<double> out(X.rows());
  for (int r = 0; r < X.rows(); ++r) {
    const double eta =
        (offset.empty() ? 0.0 : offset[r]) + X.row_dot(r, fit.coefficients);
    out[r] = clamp.clamp(expit(eta));
  }
  return out;
}

}  // namespace rmst

#pragma once

// Independent test oracles. Everything here is a literal transcription of
// the defining formulas with its own code path (dense matrices, quotient
// ratios, no clamping), kept deliberately separate from the library
// implementations it checks.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rmst::testing {

// Plain Newton-Raphson for the offset logistic MLE on a dense design.
// No clamping, no step-halving: callers supply well-posed instances.
inline Eigen::VectorXd newton_logistic_oracle(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const Eigen::VectorXd& offset, int max_iter = 200, double tol = 1e-12) {
  const int p = static_cast<int>(X.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd eta = offset + X * beta;
    const Eigen::VectorXd prob =
        eta.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const Eigen::VectorXd grad = X.transpose() * (y - prob);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
    for (int r = 0; r < X.rows(); ++r) {
      hess += prob(r) * (1.0 - prob(r)) * X.row(r).transpose() * X.row(r);
    }
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    beta += step;
    if (grad.lpNorm<Eigen::Infinity>() < tol) break;
  }
  return beta;
}

// Per-subject nuisance surfaces for the naive oracles: plain arrays indexed
// by natural time, no product-form tricks.
struct OracleSurfaces {
  int tau;
  std::vector<double> h1, h0;    // h(m, a, w), slots 1..tau-1
  std::vector<double> g1, g0;    // g_R(m, a, w), slots 0..tau-2
  double ga1;                    // g_A(1, w)

  double h(int m, int a) const { return a == 1 ? h1[m] : h0[m]; }
  double gr(int m, int a) const { return a == 1 ? g1[m] : g0[m]; }
  double ga(int a) const { return a == 1 ? ga1 : 1.0 - ga1; }
  double S(int t, int a) const {
    double s = 1.0;
    for (int m = 1; m <= t; ++m) s *= 1.0 - h(m, a);
    return s;
  }
  double G(int t, int a) const {
    double g = 1.0;
    for (int m = 0; m <= t - 1; ++m) g *= 1.0 - gr(m, a);
    return g;
  }
};

// Z_a(m, A, W) by direct summation with quotient ratios.
inline double aux_z_oracle(const OracleSurfaces& s, int a_target, int a_obs,
                           int m) {
  if (a_obs != a_target) return 0.0;
  double acc = 0.0;
  for (int t = m; t <= s.tau - 1; ++t) {
    acc += s.S(t, a_target) / s.S(m, a_target);
  }
  return -acc / (s.ga(a_target) * s.G(m, a_target));
}

inline double aux_h_oracle(const OracleSurfaces& s, int a_obs, int m) {
  double acc = 0.0;
  for (int t = m + 1; t <= s.tau - 1; ++t) {
    acc += (2.0 * a_obs - 1.0) / s.ga(a_obs) * s.S(t, a_obs) / s.S(m, a_obs) /
           s.G(m + 1, a_obs);
  }
  return -acc;
}

inline double aux_m_oracle(const OracleSurfaces& s) {
  double acc = 0.0;
  for (int t = 1; t <= s.tau - 1; ++t) {
    acc += s.S(t, 1) / s.ga(1) + s.S(t, 0) / s.ga(0);
  }
  return acc;
}

// Subject-level observed path for the oracle EIF evaluation.
struct OracleSubject {
  int arm;
  int time;   // min(C, T)
  int event;  // Delta
  bool at_event_risk(int m) const { return time >= m; }
  double l_at(int m) const {
    return (event == 1 && time == m) ? 1.0 : 0.0;
  }
};

inline double eif_oracle(const OracleSurfaces& s, const OracleSubject& o,
                         double theta) {
  double acc = 0.0;
  for (int m = 1; m <= s.tau - 1; ++m) {
    if (o.at_event_risk(m)) {
      const double z = aux_z_oracle(s, 1, o.arm, m) -
                       aux_z_oracle(s, 0, o.arm, m);
      acc += z * (o.l_at(m) - s.h(m, o.arm));
    }
    acc += s.S(m, 1) - s.S(m, 0);
  }
  return acc - theta;
}

}  // namespace rmst::testing

#include "rmst/eif.hpp"

#include <vector>

#include "rmst/long_form.hpp"

namespace rmst {

double aux_z(const NuisanceBundle& b, int subject, int a_target,
             int a_observed, int m) {
  if (a_observed != a_target) return 0.0;
  std::vector<double> q(b.tau);
  b.suffix_survival_ratios(subject, a_target, q);
  return -q[m] / (b.g_a(a_target, subject) * b.cens.at(subject, a_target, m));
}

double aux_h(const NuisanceBundle& b, int subject, int a_observed, int m) {
  std::vector<double> q(b.tau);
  b.suffix_survival_ratios(subject, a_observed, q);
  const double sign = 2.0 * a_observed - 1.0;
  return -sign * (q[m] - 1.0) /
         (b.g_a(a_observed, subject) * b.cens.at(subject, a_observed, m + 1));
}

double aux_m(const NuisanceBundle& b, int subject) {
  double acc = 0.0;
  for (int t = 1; t <= b.tau - 1; ++t) {
    acc += b.surv.at(subject, 1, t) / b.g_a(1, subject) +
           b.surv.at(subject, 0, t) / b.g_a(0, subject);
  }
  return acc;
}

EifValue eval_eif(const NuisanceBundle& b, const Dataset& ds, int subject,
                  double theta) {
  const SubjectRecord& rec = ds.records[subject];
  const int a = rec.arm;
  const double sign = 2.0 * a - 1.0;

  std::vector<double> q(b.tau);
  b.suffix_survival_ratios(subject, a, q);

  EifValue val;
  val.theta = theta;
  for (int m = 1; m <= b.tau - 1; ++m) {
    val.plug_in += b.surv.at(subject, 1, m) - b.surv.at(subject, 0, m);
    if (!event_risk(rec, m)) continue;
    const double z =
        -sign * q[m] / (b.g_a(a, subject) * b.cens.at(subject, a, m));
    const double resid =
        (event_at(rec, m) ? 1.0 : 0.0) - b.h.at(subject, a, m);
    val.martingale += z * resid;
  }
  return val;
}

double eval_d_km(const MarginalBundle& mb, const SubjectRecord& rec,
                 int k_max) {
  const int a = rec.arm;
  const double sign = 2.0 * a - 1.0;
  const int tau = mb.tau;
  (void)k_max;

  double total = 0.0;
  for (int t = 1; t <= tau - 1; ++t) {
    // ratio = S(t,a)/S(m,a) built as the product of (1-h) over (m, t].
    double ratio = 1.0;
    double inner = 0.0;
    for (int m = t; m >= 1; --m) {
      if (event_risk(rec, m)) {
        const double resid = (event_at(rec, m) ? 1.0 : 0.0) - mb.h[a][m];
        inner += ratio / (mb.g_a(a) * mb.cens[a][m]) * resid;
      }
      ratio *= 1.0 - mb.h[a][m];
    }
    total += inner;
  }
  return -sign * total;
}

double eval_d_car(const NuisanceBundle& b, const Dataset& ds, int subject) {
  const SubjectRecord& rec = ds.records[subject];
  // A zero treatment residual kills the M term even when 1/g_A(0,W) is
  // unbounded (g_A pinned at 1 with A = 1).
  const double resid_a = rec.arm - b.g_a1[subject];
  double total = resid_a == 0.0 ? 0.0 : aux_m(b, subject) * resid_a;

  std::vector<double> q(b.tau);
  b.suffix_survival_ratios(subject, rec.arm, q);
  const double sign = 2.0 * rec.arm - 1.0;
  for (int m = 0; m <= b.tau - 2; ++m) {
    if (!censor_risk(rec, m)) break;  // J_m is monotone in m
    const double hm = -sign * (q[m] - 1.0) /
                      (b.g_a(rec.arm, subject) *
                       b.cens.at(subject, rec.arm, m + 1));
    const double resid = (censor_at(rec, m, ds.k_max) ? 1.0 : 0.0) -
                         b.g_r.at(subject, rec.arm, m);
    total += hm * resid;
  }
  return total;
}

double theta_aipw(const NuisanceBundle& b, const Dataset& ds) {
  const int n = ds.n();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const SubjectRecord& rec = ds.records[i];
    const int a = rec.arm;
    const double sign = 2.0 * a - 1.0;
    for (int m = 1; m <= b.tau - 1; ++m) {
      acc += b.surv.at(i, 1, m) - b.surv.at(i, 0, m);
      if (!event_risk(rec, m)) continue;
      const double resid = (event_at(rec, m) ? 1.0 : 0.0) - b.h.at(i, a, m);
      const double w =
          sign / (b.g_a(a, i) * b.cens.at(i, a, m)) * resid;
      double ratio = 1.0;
      double tail = 0.0;
      for (int t = m; t <= b.tau - 1; ++t) {
        if (t > m) ratio *= 1.0 - b.h.at(i, a, t);
        tail += ratio;
      }
      acc -= w * tail;
    }
  }
  return acc / n;
}

}  // namespace rmst

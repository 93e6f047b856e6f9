#include "rmst/nuisance.hpp"

#include "rmst/curves.hpp"
#include "rmst/long_form.hpp"

namespace rmst {

NuisanceBundle NuisanceBundle::allocate(int n, int tau) {
  NuisanceBundle b;
  b.tau = tau;
  b.h = Grid3(n, tau, 0.0);
  b.g_r = Grid3(n, tau > 1 ? tau - 1 : 1, 0.0);
  b.g_a1.assign(n, 0.5);
  b.surv = Grid3(n, tau, 1.0);
  b.cens = Grid3(n, tau, 1.0);
  return b;
}

void NuisanceBundle::refresh() {
  for (int i = 0; i < n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      double s = 1.0, g = 1.0;
      surv.at(i, a, 0) = 1.0;
      cens.at(i, a, 0) = 1.0;
      for (int t = 1; t <= tau - 1; ++t) {
        s *= 1.0 - h.at(i, a, t);
        g *= 1.0 - g_r.at(i, a, t - 1);
        surv.at(i, a, t) = s;
        cens.at(i, a, t) = g;
      }
    }
  }
}

void NuisanceBundle::suffix_survival_ratios(int subject, int arm,
                                            std::span<double> q) const {
  q[tau - 1] = 1.0;
  for (int m = tau - 2; m >= 0; --m) {
    q[m] = 1.0 + (1.0 - h.at(subject, arm, m + 1)) * q[m + 1];
  }
}

std::vector<double> NuisanceBundle::marginal_survival(int arm) const {
  std::vector<double> out(tau, 0.0);
  for (int t = 0; t <= tau - 1; ++t) {
    double acc = 0.0;
    for (int i = 0; i < n(); ++i) acc += surv.at(i, arm, t);
    out[t] = acc / n();
  }
  return out;
}

MarginalBundle marginal_bundle_km(const Dataset& ds, int tau) {
  MarginalBundle mb;
  mb.tau = tau;
  mb.g_a1 = static_cast<double>(ds.arm_count(1)) / ds.n();
  for (int arm = 0; arm <= 1; ++arm) {
    mb.h[arm].assign(tau, 0.0);
    for (int m = 1; m <= tau - 1; ++m) {
      int risk = 0, events = 0;
      for (const auto& rec : ds.records) {
        if (rec.arm != arm) continue;
        if (event_risk(rec, m)) {
          ++risk;
          events += event_at(rec, m);
        }
      }
      mb.h[arm][m] = risk > 0 ? static_cast<double>(events) / risk : 0.0;
    }
    mb.surv[arm] = survival_from_hazard(mb.h[arm], tau);
    const CensoringCurve gc = km_censoring(ds, arm, tau);
    mb.cens[arm].assign(gc.values.begin(), gc.values.begin() + tau);
  }
  return mb;
}

NuisanceBundle broadcast_marginal(const MarginalBundle& mb, int n) {
  NuisanceBundle b = NuisanceBundle::allocate(n, mb.tau);
  for (int i = 0; i < n; ++i) {
    b.g_a1[i] = mb.g_a1;
    for (int a = 0; a <= 1; ++a) {
      for (int m = 1; m <= mb.tau - 1; ++m) b.h.at(i, a, m) = mb.h[a][m];
      for (int m = 0; m + 1 <= mb.tau - 1; ++m) {
        // Recover the censoring hazard from consecutive survivor values.
        const double gm = mb.cens[a][m];
        const double gm1 = mb.cens[a][m + 1];
        b.g_r.at(i, a, m) = gm > 0.0 ? 1.0 - gm1 / gm : 0.0;
      }
    }
  }
  b.refresh();
  return b;
}

}  // namespace rmst

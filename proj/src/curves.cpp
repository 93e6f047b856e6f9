#include "rmst/curves.hpp"

#include <sstream>

#include "rmst/errors.hpp"
#include "rmst/long_form.hpp"

namespace rmst {

namespace {

void check_tau(const Dataset& ds, int tau) {
  if (tau < 1 || tau > ds.k_max) {
    std::ostringstream os;
    os << "tau " << tau << " must lie in {1,...,K=" << ds.k_max << "}";
    throw validation_error(os.str());
  }
}

// Uncensored-and-event-free-through-t indicator 1{Rbar_{t-1}=0, Lbar_t=0}.
bool at_risk_past(const SubjectRecord& rec, int t) {
  return rec.event == 1 ? rec.time > t : rec.time >= t;
}

// The estimators sum S(t) over t = 1..tau-1 with the t = 0 term fixed at 1
// (S(0) is 1 by definition; raw IPW curves can deviate there when g_A is
// not saturated, and that deviation is not part of the estimand).
ThetaByCurves assemble(SurvivalCurve c1, SurvivalCurve c0) {
  ThetaByCurves out;
  out.rmst1 = 1.0 + rmst_from_values(
      std::span<const double>(c1.values).subspan(1));
  out.rmst0 = 1.0 + rmst_from_values(
      std::span<const double>(c0.values).subspan(1));
  out.theta = out.rmst1 - out.rmst0;
  out.curve1 = std::move(c1);
  out.curve0 = std::move(c0);
  return out;
}

bool is_monotone(const std::vector<double>& v) {
  for (size_t t = 1; t < v.size(); ++t) {
    if (v[t] > v[t - 1] + 1e-12) return false;
  }
  return true;
}

}  // namespace

const char* curve_source_name(CurveSource s) {
  switch (s) {
    case CurveSource::KaplanMeier: return "km";
    case CurveSource::Ipw: return "ipw";
    case CurveSource::AdjIpw: return "adj-ipw";
    case CurveSource::Aipw: return "aipw";
    case CurveSource::Substitution: return "substitution";
  }
  return "?";
}

SurvivalCurve km_survival(const Dataset& ds, int arm, int tau) {
  check_tau(ds, tau);
  SurvivalCurve curve;
  curve.arm = arm;
  curve.source = CurveSource::KaplanMeier;
  curve.values.assign(tau, 1.0);
  double s = 1.0;
  for (int m = 1; m <= tau - 1; ++m) {
    int risk = 0, events = 0;
    for (const auto& rec : ds.records) {
      if (rec.arm != arm) continue;
      if (event_risk(rec, m)) {
        ++risk;
        events += event_at(rec, m);
      }
    }
    const double frac = risk > 0 ? static_cast<double>(events) / risk : 0.0;
    s *= 1.0 - frac;
    curve.values[m] = s;
  }
  return curve;
}

CensoringCurve km_censoring(const Dataset& ds, int arm, int tau) {
  check_tau(ds, tau);
  CensoringCurve curve;
  curve.arm = arm;
  curve.values.assign(tau + 1, 1.0);
  double g = 1.0;
  for (int m = 0; m <= tau - 1; ++m) {
    int risk = 0, events = 0;
    for (const auto& rec : ds.records) {
      if (rec.arm != arm) continue;
      if (censor_risk(rec, m)) {
        ++risk;
        events += censor_at(rec, m, ds.k_max);
      }
    }
    const double frac = risk > 0 ? static_cast<double>(events) / risk : 0.0;
    g *= 1.0 - frac;
    curve.values[m + 1] = g;
  }
  return curve;
}

std::vector<double> survival_from_hazard(std::span<const double> h, int tau) {
  std::vector<double> s(tau, 1.0);
  for (int t = 1; t <= tau - 1; ++t) {
    s[t] = s[t - 1] * (1.0 - h[t]);
  }
  return s;
}

std::vector<double> censoring_from_hazard(std::span<const double> g, int tau) {
  std::vector<double> out(tau, 1.0);
  for (int t = 1; t <= tau - 1; ++t) {
    out[t] = out[t - 1] * (1.0 - g[t - 1]);
  }
  return out;
}

double rmst_from_values(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double rmst_from_curve(const SurvivalCurve& curve) {
  return rmst_from_values(curve.values);
}

ThetaByCurves theta_km(const Dataset& ds, int tau) {
  return assemble(km_survival(ds, 1, tau), km_survival(ds, 0, tau));
}

ThetaByCurves theta_ipw_unadjusted(const Dataset& ds, int tau) {
  check_tau(ds, tau);
  const int n = ds.n();
  const double ga1 = static_cast<double>(ds.arm_count(1)) / n;
  const double ga[2] = {1.0 - ga1, ga1};

  SurvivalCurve curves[2];
  for (int arm = 0; arm <= 1; ++arm) {
    const CensoringCurve G = km_censoring(ds, arm, tau);
    SurvivalCurve& c = curves[arm];
    c.arm = arm;
    c.source = CurveSource::Ipw;
    c.values.assign(tau, 0.0);
    for (int t = 0; t <= tau - 1; ++t) {
      int count = 0;
      for (const auto& rec : ds.records) {
        count += (rec.arm == arm && at_risk_past(rec, t));
      }
      if (count == 0) {
        c.values[t] = 0.0;
        continue;
      }
      if (G.values[t] <= 0.0) {
        std::ostringstream os;
        os << "degenerate censoring weights: G_km(" << t << ",arm=" << arm
           << ") = 0 with " << count << " subjects still uncensored";
        throw numeric_error(os.str());
      }
      c.values[t] = count / (n * ga[arm] * G.values[t]);
    }
    c.monotone = is_monotone(c.values);
  }
  return assemble(std::move(curves[1]), std::move(curves[0]));
}

ThetaByCurves theta_ipw_adjusted(const Dataset& ds,
                                 std::span<const double> g_a1,
                                 const Grid3& cens, int tau) {
  check_tau(ds, tau);
  const int n = ds.n();
  bool positivity = false;

  SurvivalCurve curves[2];
  for (int arm = 0; arm <= 1; ++arm) {
    SurvivalCurve& c = curves[arm];
    c.arm = arm;
    c.source = CurveSource::AdjIpw;
    c.values.assign(tau, 0.0);
    for (int t = 0; t <= tau - 1; ++t) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& rec = ds.records[i];
        if (rec.arm != arm || !at_risk_past(rec, t)) continue;
        const double ga = arm == 1 ? g_a1[i] : 1.0 - g_a1[i];
        const double denom = ga * cens.at(i, arm, t);
        positivity = positivity || denom < 1e-6;
        acc += 1.0 / denom;
      }
      c.values[t] = acc / n;
    }
    c.monotone = is_monotone(c.values);
  }
  ThetaByCurves out = assemble(std::move(curves[1]), std::move(curves[0]));
  out.positivity_warning = positivity;
  return out;
}

}  // namespace rmst

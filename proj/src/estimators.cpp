#include "rmst/estimators.hpp"

#include <cmath>

#include "rmst/eif.hpp"
#include "rmst/errors.hpp"

namespace rmst {

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::KM: return "km";
    case EstimatorKind::IpwUnadjusted: return "ipw";
    case EstimatorKind::IpwAdjusted: return "adj-ipw";
    case EstimatorKind::Aipw: return "aipw";
    case EstimatorKind::Tmle: return "tmle";
  }
  return "?";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "km") return EstimatorKind::KM;
  if (name == "ipw") return EstimatorKind::IpwUnadjusted;
  if (name == "adj-ipw") return EstimatorKind::IpwAdjusted;
  if (name == "aipw") return EstimatorKind::Aipw;
  if (name == "tmle") return EstimatorKind::Tmle;
  throw config_error("unknown estimator '" + name + "'");
}

TmleConfig EstimatorConfig::tmle() const {
  TmleConfig t;
  t.tau = tau;
  t.h_spec = h_spec;
  t.gr_spec = gr_spec;
  t.ga_spec = ga_spec;
  t.max_outer_iterations = max_outer_iterations;
  t.convergence_scale = convergence_scale;
  t.clamp = clamp;
  t.allow_unsaturated_gr = allow_unsaturated_gr;
  return t;
}

namespace {

// Sample sd / sqrt(n) of the influence values.
double plugin_se(const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

void km_family_se(const Dataset& ds, int tau, EstimateResult* out) {
  const MarginalBundle mb = marginal_bundle_km(ds, tau);
  std::vector<double> vals(ds.n());
  for (int i = 0; i < ds.n(); ++i) {
    vals[i] = eval_d_km(mb, ds.records[i], ds.k_max);
  }
  out->se = plugin_se(vals);
  out->eif_values = std::move(vals);
}

void from_curves(const ThetaByCurves& tc, EstimateResult* out) {
  out->theta = tc.theta;
  out->rmst1 = tc.rmst1;
  out->rmst0 = tc.rmst0;
  out->curve1 = tc.curve1;
  out->curve0 = tc.curve0;
  out->positivity_warning = tc.positivity_warning;
}

// Shared nuisance fitting for the adjusted estimators; the TMLE path goes
// through tmle_fit instead.
NuisanceBundle fit_bundle(const Dataset& ds, const EstimatorConfig& cfg,
                          bool need_h, bool* ridge) {
  TmleConfig tc = resolve_tmle_config(ds, cfg.tmle());
  const TmleWorkspace ws = make_tmle_workspace(ds, tc.tau);
  InitialFitInfo info;
  NuisanceBundle b = fit_initial(ds, tc, ws, &info);
  if (ridge != nullptr) {
    *ridge = info.ridge_gr || info.ridge_ga || (need_h && info.ridge_h);
  }
  return b;
}

}  // namespace

EstimateResult run_estimator(const Dataset& ds, const EstimatorConfig& cfg) {
  EstimateResult out;
  out.kind = cfg.kind;

  switch (cfg.kind) {
    case EstimatorKind::KM: {
      from_curves(theta_km(ds, cfg.tau), &out);
      if (cfg.want_se) km_family_se(ds, cfg.tau, &out);
      break;
    }
    case EstimatorKind::IpwUnadjusted: {
      from_curves(theta_ipw_unadjusted(ds, cfg.tau), &out);
      if (cfg.want_se) km_family_se(ds, cfg.tau, &out);
      break;
    }
    case EstimatorKind::IpwAdjusted: {
      bool ridge = false;
      const NuisanceBundle b = fit_bundle(ds, cfg, false, &ridge);
      out.ridge_used = ridge;
      from_curves(theta_ipw_adjusted(ds, b.g_a1, b.cens, cfg.tau), &out);
      out.se_reason = "no plug-in variance for adj-ipw; use bootstrap";
      if (cfg.keep_bundle) out.bundle = b;
      break;
    }
    case EstimatorKind::Aipw: {
      bool ridge = false;
      const NuisanceBundle b = fit_bundle(ds, cfg, true, &ridge);
      out.ridge_used = ridge;
      out.theta = theta_aipw(b, ds);

      // Per-arm curves: plug-in survival means plus each arm's share of the
      // augmentation, split by the (2A-1) sign of the estimating equation.
      const std::vector<double> s1 = b.marginal_survival(1);
      const std::vector<double> s0 = b.marginal_survival(0);
      std::vector<double> aug1(cfg.tau, 0.0), aug0(cfg.tau, 0.0);
      for (int i = 0; i < ds.n(); ++i) {
        const SubjectRecord& rec = ds.records[i];
        const int a = rec.arm;
        std::vector<double>& aug = a == 1 ? aug1 : aug0;
        for (int m = 1; m <= cfg.tau - 1 && rec.time >= m; ++m) {
          const double resid =
              ((rec.event == 1 && rec.time == m) ? 1.0 : 0.0) -
              b.h.at(i, a, m);
          const double w = resid / (b.g_a(a, i) * b.cens.at(i, a, m));
          double ratio = 1.0;
          for (int t = m; t <= cfg.tau - 1; ++t) {
            if (t > m) ratio *= 1.0 - b.h.at(i, a, t);
            aug[t] -= w * ratio;
          }
        }
      }
      auto make_curve = [&](int arm, const std::vector<double>& s,
                            std::vector<double>& aug) {
        SurvivalCurve c;
        c.arm = arm;
        c.source = CurveSource::Aipw;
        c.values.resize(cfg.tau);
        c.monotone = true;
        for (int t = 0; t <= cfg.tau - 1; ++t) {
          c.values[t] = s[t] + aug[t] / ds.n();
          if (t > 0 && c.values[t] > c.values[t - 1] + 1e-12) {
            c.monotone = false;
          }
        }
        return c;
      };
      out.curve1 = make_curve(1, s1, aug1);
      out.curve0 = make_curve(0, s0, aug0);
      out.rmst1 = rmst_from_values(out.curve1.values);
      out.rmst0 = rmst_from_values(out.curve0.values);
      if (cfg.want_se) {
        std::vector<double> vals(ds.n());
        for (int i = 0; i < ds.n(); ++i) {
          vals[i] = eval_eif(b, ds, i, out.theta).total();
        }
        out.se = plugin_se(vals);
        out.eif_values = std::move(vals);
      }
      if (cfg.keep_bundle) out.bundle = b;
      break;
    }
    case EstimatorKind::Tmle: {
      TmleResult t = tmle_fit(ds, cfg.tmle());
      out.theta = t.theta_hat;
      out.rmst1 = t.rmst1;
      out.rmst0 = t.rmst0;
      out.curve1 = std::move(t.curve1);
      out.curve0 = std::move(t.curve0);
      out.converged = t.converged;
      out.iterations = t.iterations_used;
      out.mean_eif = t.mean_eif;
      out.ridge_used = t.ridge_anywhere;
      if (cfg.want_se) {
        out.se = t.se_plugin;
        if (t.ridge_anywhere) {
          out.se_reason = "ridge fallback fired; plug-in SE may be off";
        }
        out.eif_values.resize(ds.n());
        for (int i = 0; i < ds.n(); ++i) {
          out.eif_values[i] =
              eval_eif(t.bundle, ds, i, t.theta_hat).total();
        }
      }
      if (cfg.keep_bundle) out.bundle = std::move(t.bundle);
      break;
    }
  }
  return out;
}

}  // namespace rmst

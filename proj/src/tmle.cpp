#include "rmst/tmle.hpp"

#include <cmath>
#include <sstream>

#include "rmst/errors.hpp"
#include "rmst/long_form.hpp"

namespace rmst {

namespace {

// Fits one working model and writes predictions onto grid slots
// [t_first, t_last] for both arms and all subjects. When the spec carries a
// time factor, cells are resolved at (time, arm) granularity if the arm
// interaction is present, by time alone otherwise:
//   - an empty risk cell is pinned to hazard zero (curves stay flat there);
//   - a cell whose responses are all 0 (or all 1) is pinned to the clamp
//     floor (or ceiling): its factor coefficient diverges in the MLE and
//     its rows drop out of the profile likelihood for everything else, so
//     excluding them up front gives the same limit without the slow
//     boundary drift in IRLS.
bool fit_hazard_model(const Dataset& ds, const ModelSpec& spec,
                      std::span<const ModelRow> rows, const ClampBounds& clamp,
                      int t_first, int t_last, Grid3* grid) {
  const int k_levels = ds.k_max + 1;
  const bool by_arm = spec.has(TermKind::ArmTimeFactor);
  const bool by_time = by_arm || spec.has(TermKind::TimeFactor);

  // Per-cell row and response-sum counts.
  std::vector<int> cell_rows(2 * k_levels, 0);
  std::vector<double> cell_sum(2 * k_levels, 0.0);
  auto cell_of = [&](int time, int arm) {
    return by_arm ? arm * k_levels + time : time;
  };
  for (const auto& r : rows) {
    cell_rows[cell_of(r.time, r.arm)] += 1;
    cell_sum[cell_of(r.time, r.arm)] += r.response;
  }

  // Cell states: -1 fit normally, 0 empty, 1 pinned low, 2 pinned high.
  std::vector<signed char> state(2 * k_levels, -1);
  if (by_time) {
    for (int c = 0; c < 2 * k_levels; ++c) {
      if (cell_rows[c] == 0) {
        state[c] = 0;
      } else if (cell_sum[c] == 0.0) {
        state[c] = 1;
      } else if (cell_sum[c] == cell_rows[c]) {
        state[c] = 2;
      }
    }
  }

  bool ridge = false;
  LogisticFit fit;
  const DesignLayout lay = make_design_layout(spec, ds.k_max);
  std::vector<ModelRow> kept;
  if (by_time) {
    kept.reserve(rows.size());
    for (const auto& r : rows) {
      if (state[cell_of(r.time, r.arm)] == -1) kept.push_back(r);
    }
  } else {
    kept.assign(rows.begin(), rows.end());
  }
  const bool have_fit = !kept.empty();
  if (have_fit) {
    const DesignMatrix X = build_design(spec, ds, kept);
    std::vector<double> y(kept.size());
    for (size_t r = 0; r < kept.size(); ++r) y[r] = kept[r].response;
    LogisticOptions opts;
    opts.clamp = clamp;
    fit = fit_logistic(X, y, {}, {}, opts);
    ridge = fit.ridge_used;
  }

  // Every grammar term depends on (time, arm) alone or on (subject, arm)
  // alone, so the linear predictor splits into two small tables.
  std::vector<double> time_part(2 * (t_last + 1), 0.0);
  std::vector<double> subj_part(static_cast<size_t>(ds.n()) * 2, 0.0);
  if (have_fit) {
    const std::vector<double>& beta = fit.coefficients;
    for (size_t ti = 0; ti < spec.terms.size(); ++ti) {
      const Term& term = spec.terms[ti];
      const int base = lay.term_start[ti];
      switch (term.kind) {
        case TermKind::Intercept:
        case TermKind::Arm:
        case TermKind::TimeLinear:
        case TermKind::ArmTimeLinear:
        case TermKind::TimeFactor:
        case TermKind::ArmTimeFactor:
          for (int a = 0; a <= 1; ++a) {
            for (int t = t_first; t <= t_last; ++t) {
              double v = 0.0;
              switch (term.kind) {
                case TermKind::Intercept: v = beta[base]; break;
                case TermKind::Arm: v = a ? beta[base] : 0.0; break;
                case TermKind::TimeLinear: v = t * beta[base]; break;
                case TermKind::ArmTimeLinear:
                  v = a ? t * beta[base] : 0.0;
                  break;
                case TermKind::TimeFactor: {
                  const int l = t - lay.tf_first;
                  v = (l >= 0 && l < lay.tf_count) ? beta[base + l] : 0.0;
                  break;
                }
                case TermKind::ArmTimeFactor: {
                  const int l = t - lay.tf_first;
                  v = (a && l >= 0 && l < lay.tf_count) ? beta[base + l]
                                                        : 0.0;
                  break;
                }
                default: break;
              }
              time_part[a * (t_last + 1) + t] += v;
            }
          }
          break;
        case TermKind::Covariate:
          for (int i = 0; i < ds.n(); ++i) {
            const double v = ds.records[i].w[term.covariate] * beta[base];
            subj_part[i * 2] += v;
            subj_part[i * 2 + 1] += v;
          }
          break;
        case TermKind::ArmCovariate:
          for (int i = 0; i < ds.n(); ++i) {
            subj_part[i * 2 + 1] +=
                ds.records[i].w[term.covariate] * beta[base];
          }
          break;
      }
    }
  }

  for (int i = 0; i < ds.n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      for (int t = t_first; t <= t_last; ++t) {
        const signed char st =
            rows.empty() ? 0 : (by_time ? state[cell_of(t, a)] : -1);
        if (st == 0) {
          grid->at(i, a, t) = 0.0;
        } else if (st == 1) {
          grid->at(i, a, t) = clamp.lo;
        } else if (st == 2) {
          grid->at(i, a, t) = clamp.hi();
        } else if (!have_fit) {
          grid->at(i, a, t) = 0.0;
        } else {
          const double eta =
              time_part[a * (t_last + 1) + t] + subj_part[i * 2 + a];
          grid->at(i, a, t) = clamp.clamp(expit(eta));
        }
      }
    }
  }
  return ridge;
}

struct ZBuffers {
  Grid3 z;       // Z_a(m, a, W_i), slots 1..tau-1
  Grid3 hcov;    // H(m, a, W_i), slots 0..tau-2
  std::vector<double> q;
};

void compute_z(const NuisanceBundle& b, ZBuffers* buf) {
  const int tau = b.tau;
  if (buf->z.n != b.n()) buf->z = Grid3(b.n(), tau, 0.0);
  buf->q.resize(tau);
  for (int i = 0; i < b.n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      b.suffix_survival_ratios(i, a, buf->q);
      const double ga = b.g_a(a, i);
      for (int m = 1; m <= tau - 1; ++m) {
        buf->z.at(i, a, m) = -buf->q[m] / (ga * b.cens.at(i, a, m));
      }
    }
  }
}

void compute_hcov(const NuisanceBundle& b, ZBuffers* buf) {
  const int tau = b.tau;
  if (buf->hcov.n != b.n()) buf->hcov = Grid3(b.n(), tau, 0.0);
  buf->q.resize(tau);
  for (int i = 0; i < b.n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      b.suffix_survival_ratios(i, a, buf->q);
      const double sign = 2.0 * a - 1.0;
      const double ga = b.g_a(a, i);
      for (int m = 0; m <= tau - 2; ++m) {
        buf->hcov.at(i, a, m) =
            -sign * (buf->q[m] - 1.0) / (ga * b.cens.at(i, a, m + 1));
      }
    }
  }
}

DesignMatrix dense_columns(const std::vector<std::vector<double>>& cols) {
  DesignMatrix X;
  X.cols = static_cast<int>(cols.size());
  const size_t rows = cols.empty() ? 0 : cols[0].size();
  X.row_ptr.push_back(0);
  for (size_t r = 0; r < rows; ++r) {
    for (int c = 0; c < X.cols; ++c) {
      if (cols[c][r] != 0.0) {
        X.col_idx.push_back(c);
        X.values.push_back(cols[c][r]);
      }
    }
    X.row_ptr.push_back(static_cast<int>(X.col_idx.size()));
  }
  for (int c = 0; c < X.cols; ++c) X.col_names.push_back("z" + std::to_string(c));
  return X;
}

}  // namespace

TmleWorkspace make_tmle_workspace(const Dataset& ds, int tau) {
  TmleWorkspace ws;
  const std::vector<LongRow> rows = expand_long(ds);
  for (const auto& row : rows) {
    const int arm = ds.records[row.subject].arm;
    if (row.i_next) {
      const ModelRow mr{row.subject, row.m + 1, arm,
                        static_cast<double>(row.l_next)};
      ws.h_rows_full.push_back(mr);
      if (row.m + 1 <= tau - 1) ws.h_rows_tau.push_back(mr);
    }
    if (row.j) {
      const ModelRow mr{row.subject, row.m, arm, static_cast<double>(row.r)};
      ws.gr_rows_full.push_back(mr);
      if (row.m <= tau - 2) ws.gr_rows_tau.push_back(mr);
    }
  }
  return ws;
}

TmleConfig resolve_tmle_config(const Dataset& ds, TmleConfig cfg) {
  if (cfg.tau < 2 || cfg.tau > ds.k_max) {
    std::ostringstream os;
    os << "tau " << cfg.tau << " must lie in {2,...,K=" << ds.k_max << "}";
    throw validation_error(os.str());
  }
  if (cfg.h_spec.empty()) cfg.h_spec = default_h_spec(ds.p());
  if (cfg.gr_spec.empty()) cfg.gr_spec = default_gr_spec(ds.p());
  if (cfg.ga_spec.empty()) cfg.ga_spec = default_ga_spec(ds.p());
  const ModelSpec gr = parse_model_spec(cfg.gr_spec,
                                        ResponseRole::CensoringHazard,
                                        ds.covariate_names);
  if (!gr.has_saturated_time_arm() && !cfg.allow_unsaturated_gr) {
    throw config_error(
        "g_R spec lacks saturated(t,a) terms; pass the unsaturated "
        "acknowledgment flag to proceed: '" + cfg.gr_spec + "'");
  }
  return cfg;
}

NuisanceBundle fit_initial(const Dataset& ds, const TmleConfig& cfg,
                           const TmleWorkspace& ws, InitialFitInfo* info) {
  const ModelSpec h_spec = parse_model_spec(cfg.h_spec,
                                            ResponseRole::EventHazard,
                                            ds.covariate_names);
  const ModelSpec gr_spec = parse_model_spec(cfg.gr_spec,
                                             ResponseRole::CensoringHazard,
                                             ds.covariate_names);
  const ModelSpec ga_spec = parse_model_spec(cfg.ga_spec,
                                             ResponseRole::Treatment,
                                             ds.covariate_names);

  NuisanceBundle b = NuisanceBundle::allocate(ds.n(), cfg.tau);
  InitialFitInfo local;
  local.ridge_h = fit_hazard_model(ds, h_spec, ws.h_rows_full, cfg.clamp, 1,
                                   cfg.tau - 1, &b.h);
  local.ridge_gr = fit_hazard_model(ds, gr_spec, ws.gr_rows_full, cfg.clamp,
                                    0, cfg.tau - 2, &b.g_r);

  {
    std::vector<ModelRow> ga_rows(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
      ga_rows[i] = ModelRow{i, 0, 0, static_cast<double>(ds.records[i].arm)};
    }
    const DesignMatrix X = build_design(ga_spec, ds, ga_rows);
    std::vector<double> y(ds.n());
    for (int i = 0; i < ds.n(); ++i) y[i] = ga_rows[i].response;
    LogisticOptions opts;
    opts.clamp = cfg.clamp;
    const LogisticFit fit = fit_logistic(X, y, {}, {}, opts);
    local.ridge_ga = fit.ridge_used;
    std::vector<double> pred = predict_prob(fit, X, {}, cfg.clamp);
    b.g_a1 = std::move(pred);
  }

  b.refresh();
  if (info != nullptr) *info = local;
  return b;
}

TargetStep target_hazard(NuisanceBundle& b, const Dataset& ds,
                         const TmleWorkspace& ws, const TmleConfig& cfg) {
  TargetStep step;
  if (ws.h_rows_tau.empty()) {
    step.skipped = true;
    step.coefficients = {0.0, 0.0};
    return step;
  }
  ZBuffers buf;
  compute_z(b, &buf);

  const size_t nr = ws.h_rows_tau.size();
  std::vector<std::vector<double>> cols(2, std::vector<double>(nr, 0.0));
  std::vector<double> y(nr), offset(nr);
  for (size_t r = 0; r < nr; ++r) {
    const ModelRow& mr = ws.h_rows_tau[r];
    const double z = buf.z.at(mr.subject, mr.arm, mr.time);
    cols[mr.arm == 1 ? 0 : 1][r] = z;  // column 0: Z_1, column 1: Z_0
    y[r] = mr.response;
    offset[r] = logit(b.h.at(mr.subject, mr.arm, mr.time));
  }
  const DesignMatrix X = dense_columns(cols);
  LogisticOptions opts;
  opts.clamp = cfg.clamp;
  const LogisticFit fit = fit_logistic(X, y, offset, {}, opts);
  step.coefficients = {fit.coefficients[0], fit.coefficients[1]};
  step.ridge_used = fit.ridge_used;
  step.deviance_before = fit.deviance_history.empty()
                             ? fit.deviance
                             : fit.deviance_history.front();
  step.deviance_after = fit.deviance;

  const double e1 = fit.coefficients[0], e0 = fit.coefficients[1];
  for (int i = 0; i < b.n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      const double eps = a == 1 ? e1 : e0;
      for (int m = 1; m <= b.tau - 1; ++m) {
        const double cur = b.h.at(i, a, m);
        if (cur <= 0.0) continue;  // empty-risk cell stays pinned at zero
        b.h.at(i, a, m) =
            cfg.clamp.clamp(expit(logit(cur) + eps * buf.z.at(i, a, m)));
      }
    }
  }
  b.refresh();
  return step;
}

TargetStep target_censoring(NuisanceBundle& b, const Dataset& ds,
                            const TmleWorkspace& ws, const TmleConfig& cfg) {
  TargetStep step;
  if (ws.gr_rows_tau.empty()) {
    step.skipped = true;
    step.coefficients = {0.0};
    return step;
  }
  ZBuffers buf;
  compute_hcov(b, &buf);

  const size_t nr = ws.gr_rows_tau.size();
  std::vector<std::vector<double>> cols(1, std::vector<double>(nr, 0.0));
  std::vector<double> y(nr), offset(nr);
  for (size_t r = 0; r < nr; ++r) {
    const ModelRow& mr = ws.gr_rows_tau[r];
    cols[0][r] = buf.hcov.at(mr.subject, mr.arm, mr.time);
    y[r] = mr.response;
    offset[r] = logit(b.g_r.at(mr.subject, mr.arm, mr.time));
  }
  const DesignMatrix X = dense_columns(cols);
  LogisticOptions opts;
  opts.clamp = cfg.clamp;
  const LogisticFit fit = fit_logistic(X, y, offset, {}, opts);
  step.coefficients = {fit.coefficients[0]};
  step.ridge_used = fit.ridge_used;
  step.deviance_before = fit.deviance_history.empty()
                             ? fit.deviance
                             : fit.deviance_history.front();
  step.deviance_after = fit.deviance;

  const double gamma = fit.coefficients[0];
  for (int i = 0; i < b.n(); ++i) {
    for (int a = 0; a <= 1; ++a) {
      for (int m = 0; m <= b.tau - 2; ++m) {
        const double cur = b.g_r.at(i, a, m);
        if (cur <= 0.0) continue;
        b.g_r.at(i, a, m) =
            cfg.clamp.clamp(expit(logit(cur) + gamma * buf.hcov.at(i, a, m)));
      }
    }
  }
  b.refresh();
  return step;
}

TargetStep target_treatment(NuisanceBundle& b, const Dataset& ds,
                            const TmleConfig& cfg) {
  TargetStep step;
  const int n = b.n();
  std::vector<std::vector<double>> cols(1, std::vector<double>(n, 0.0));
  std::vector<double> y(n), offset(n);
  for (int i = 0; i < n; ++i) {
    cols[0][i] = aux_m(b, i);
    y[i] = ds.records[i].arm;
    offset[i] = logit(b.g_a1[i]);
  }
  const DesignMatrix X = dense_columns(cols);
  LogisticOptions opts;
  opts.clamp = cfg.clamp;
  const LogisticFit fit = fit_logistic(X, y, offset, {}, opts);
  step.coefficients = {fit.coefficients[0]};
  step.ridge_used = fit.ridge_used;
  step.deviance_before = fit.deviance_history.empty()
                             ? fit.deviance
                             : fit.deviance_history.front();
  step.deviance_after = fit.deviance;

  const double nu = fit.coefficients[0];
  for (int i = 0; i < n; ++i) {
    b.g_a1[i] = cfg.clamp.clamp(expit(logit(b.g_a1[i]) + nu * cols[0][i]));
  }
  return step;
}

TmleResult tmle_fit(const Dataset& ds, const TmleConfig& cfg_in) {
  const TmleConfig cfg = resolve_tmle_config(ds, cfg_in);
  const TmleWorkspace ws = make_tmle_workspace(ds, cfg.tau);
  InitialFitInfo init;
  NuisanceBundle b = fit_initial(ds, cfg, ws, &init);
  return tmle_target(ds, cfg, ws, std::move(b),
                     init.ridge_h || init.ridge_gr || init.ridge_ga);
}

TmleResult tmle_target(const Dataset& ds, const TmleConfig& cfg,
                       const TmleWorkspace& ws, NuisanceBundle b,
                       bool ridge_initial) {
  const int n = ds.n();
  TmleResult res;
  res.ridge_anywhere = ridge_initial;

  auto snapshot = [&](std::vector<double>* sh, std::vector<double>* sg,
                      std::vector<double>* sa) {
    sh->resize(ws.h_rows_tau.size());
    for (size_t r = 0; r < ws.h_rows_tau.size(); ++r) {
      const ModelRow& mr = ws.h_rows_tau[r];
      (*sh)[r] = b.h.at(mr.subject, mr.arm, mr.time);
    }
    sg->resize(ws.gr_rows_tau.size());
    for (size_t r = 0; r < ws.gr_rows_tau.size(); ++r) {
      const ModelRow& mr = ws.gr_rows_tau[r];
      (*sg)[r] = b.g_r.at(mr.subject, mr.arm, mr.time);
    }
    *sa = b.g_a1;
  };
  auto mean_sq_diff = [](const std::vector<double>& a,
                         const std::vector<double>& c) {
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      acc += (a[k] - c[k]) * (a[k] - c[k]);
    }
    return acc / a.size();
  };

  // The substitution estimate and empirical EIF mean of the current bundle.
  auto current_mean_eif = [&]() {
    const std::vector<double> s1 = b.marginal_survival(1);
    const std::vector<double> s0 = b.marginal_survival(0);
    const double theta =
        rmst_from_values(s1) - rmst_from_values(s0);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      mean += eval_eif(b, ds, i, theta).total();
    }
    return mean / n;
  };

  const double tol = cfg.convergence_scale / n;
  std::vector<double> sh, sg, sa, sh2, sg2, sa2;
  for (int l = 1; l <= cfg.max_outer_iterations; ++l) {
    res.iterations_used = l;
    snapshot(&sh, &sg, &sa);

    const TargetStep st_h = target_hazard(b, ds, ws, cfg);
    const TargetStep st_g = target_censoring(b, ds, ws, cfg);
    const TargetStep st_a = target_treatment(b, ds, cfg);
    res.epsilon_history.push_back(
        {st_h.coefficients[0], st_h.coefficients[1]});
    res.gamma_history.push_back(st_g.coefficients[0]);
    res.nu_history.push_back(st_a.coefficients[0]);
    res.ridge_anywhere =
        res.ridge_anywhere || st_h.ridge_used || st_g.ridge_used ||
        st_a.ridge_used;

    snapshot(&sh2, &sg2, &sa2);
    if (mean_sq_diff(sh, sh2) <= tol && mean_sq_diff(sg, sg2) <= tol &&
        mean_sq_diff(sa, sa2) <= tol &&
        std::abs(current_mean_eif()) <= cfg.eif_tolerance) {
      res.converged = true;
      break;
    }
  }

  const std::vector<double> s1 = b.marginal_survival(1);
  const std::vector<double> s0 = b.marginal_survival(0);
  res.rmst1 = rmst_from_values(s1);
  res.rmst0 = rmst_from_values(s0);
  res.theta_hat = res.rmst1 - res.rmst0;
  res.curve1 = SurvivalCurve{1, CurveSource::Substitution, s1, true};
  res.curve0 = SurvivalCurve{0, CurveSource::Substitution, s0, true};

  double mean = 0.0, ss = 0.0;
  std::vector<double> eif(n);
  for (int i = 0; i < n; ++i) {
    eif[i] = eval_eif(b, ds, i, res.theta_hat).total();
    mean += eif[i];
  }
  mean /= n;
  for (int i = 0; i < n; ++i) ss += (eif[i] - mean) * (eif[i] - mean);
  res.mean_eif = mean;
  res.se_plugin = n > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  res.bundle = std::move(b);
  return res;
}

}  // namespace rmst

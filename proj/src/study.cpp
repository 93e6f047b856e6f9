#include "rmst/study.hpp"

#include <cmath>
#include <limits>

#include "rmst/eif.hpp"
#include "rmst/parallel.hpp"
#include "rmst/rng.hpp"

namespace rmst {

std::string study_default_gr_spec() {
  return "saturated(t,a) + w1 + w5 + a:w3";
}

namespace {

EstimatorConfig cell_estimator_config(const StudyCell& cell,
                                      EstimatorKind kind) {
  EstimatorConfig cfg;
  cfg.kind = kind;
  cfg.tau = cell.dgp.tau;
  cfg.h_spec = cell.h_spec;
  cfg.gr_spec = cell.gr_spec.empty() ? study_default_gr_spec() : cell.gr_spec;
  cfg.ga_spec = cell.ga_spec;
  cfg.want_se = false;
  cfg.keep_bundle = false;
  return cfg;
}

}  // namespace

CellReplicates run_cell(const StudyCell& cell, int replicates,
                        std::uint64_t master_seed, std::uint64_t cell_index,
                        int jobs) {
  const int ne = static_cast<int>(cell.estimators.size());
  CellReplicates out;
  out.theta.assign(ne, std::vector<double>(
      replicates, std::numeric_limits<double>::quiet_NaN()));

  std::vector<EstimatorConfig> cfgs;
  cfgs.reserve(ne);
  for (EstimatorKind k : cell.estimators) {
    cfgs.push_back(cell_estimator_config(cell, k));
  }

  // The adjusted estimators in a cell run on the same specs, so their
  // initial working-model fits are fitted once per replicate and shared.
  int first_adjusted = -1;
  for (int e = 0; e < ne; ++e) {
    const EstimatorKind k = cell.estimators[e];
    if (k == EstimatorKind::IpwAdjusted || k == EstimatorKind::Aipw ||
        k == EstimatorKind::Tmle) {
      if (first_adjusted < 0) first_adjusted = e;
    }
  }

  parallel_for(replicates, jobs, [&](int r) {
    DgpConfig dgp = cell.dgp;
    dgp.seed = CounterRng::stream(master_seed, cell_index, r).key();
    const Dataset ds = gen_trial(dgp);

    NuisanceBundle shared;
    TmleWorkspace ws;
    bool have_shared = false;
    bool shared_ridge = false;
    if (first_adjusted >= 0) {
      try {
        const TmleConfig tc =
            resolve_tmle_config(ds, cfgs[first_adjusted].tmle());
        ws = make_tmle_workspace(ds, tc.tau);
        InitialFitInfo info;
        shared = fit_initial(ds, tc, ws, &info);
        shared_ridge = info.ridge_h || info.ridge_gr || info.ridge_ga;
        have_shared = true;
      } catch (const std::exception&) {
        have_shared = false;
      }
    }

    for (int e = 0; e < ne; ++e) {
      try {
        const EstimatorKind kind = cell.estimators[e];
        if (have_shared && kind == EstimatorKind::IpwAdjusted) {
          out.theta[e][r] =
              theta_ipw_adjusted(ds, shared.g_a1, shared.cens, cfgs[e].tau)
                  .theta;
        } else if (have_shared && kind == EstimatorKind::Aipw) {
          out.theta[e][r] = theta_aipw(shared, ds);
        } else if (have_shared && kind == EstimatorKind::Tmle) {
          const TmleConfig tc = resolve_tmle_config(ds, cfgs[e].tmle());
          out.theta[e][r] =
              tmle_target(ds, tc, ws, shared, shared_ridge).theta_hat;
        } else {
          out.theta[e][r] = run_estimator(ds, cfgs[e]).theta;
        }
      } catch (const std::exception&) {
        // recorded as NaN
      }
    }
  });
  return out;
}

SimReport run_study(const StudyGrid& grid, int jobs) {
  SimReport report;
  report.grid = grid;

  for (size_t c = 0; c < grid.cells.size(); ++c) {
    const StudyCell& cell = grid.cells[c];
    CellReport cr;
    cr.cell = cell;
    const std::uint64_t oracle_seed =
        CounterRng::stream(grid.master_seed, c, 0x6F7263ULL).key();
    cr.oracle = cell.dgp.effect == EffectType::Zero
                    ? 0.0
                    : oracle_theta(cell.dgp, grid.oracle_mc, oracle_seed);

    const CellReplicates reps =
        run_cell(cell, grid.replicates, grid.master_seed, c, jobs);

    double mse_km = 0.0;
    std::vector<EstimatorStats> stats(cell.estimators.size());
    for (size_t e = 0; e < cell.estimators.size(); ++e) {
      EstimatorStats& st = stats[e];
      st.kind = cell.estimators[e];
      double mean = 0.0;
      int n_ok = 0;
      for (double t : reps.theta[e]) {
        if (std::isnan(t)) continue;
        mean += t;
        ++n_ok;
      }
      st.n_ok = n_ok;
      st.n_failed = grid.replicates - n_ok;
      if (n_ok == 0) continue;
      mean /= n_ok;
      double ss = 0.0;
      for (double t : reps.theta[e]) {
        if (std::isnan(t)) continue;
        ss += (t - mean) * (t - mean);
      }
      st.bias = mean - cr.oracle;
      st.variance = ss / n_ok;  // population convention: MSE = bias^2 + var
      st.mse = st.bias * st.bias + st.variance;
      st.mc_se_bias = n_ok > 1 ? std::sqrt(st.variance / n_ok) : 0.0;
      if (st.kind == EstimatorKind::KM) mse_km = st.mse;
      if (st.n_failed * 100 > grid.replicates) cr.failure_flag = true;
    }
    for (auto& st : stats) {
      st.rmse = (mse_km > 0.0 && st.mse > 0.0) ? mse_km / st.mse : 0.0;
    }
    cr.stats = std::move(stats);
    report.cells.push_back(std::move(cr));
  }
  return report;
}

}  // namespace rmst

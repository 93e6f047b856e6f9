#include "rmst/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmst/errors.hpp"
#include "rmst/parallel.hpp"
#include "rmst/rng.hpp"

namespace rmst {

const char* ci_method_name(CiMethod m) {
  switch (m) {
    case CiMethod::WaldPlugin: return "wald_plugin";
    case CiMethod::WaldBootstrap: return "wald_bootstrap";
    case CiMethod::PercentileBootstrap: return "percentile_bootstrap";
  }
  return "?";
}

InferenceResult wald_ci(double point, double se, double alpha,
                        CiMethod method) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw config_error("alpha must lie in (0,1)");
  }
  if (se < 0.0) throw numeric_error("wald_ci: negative standard error");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  InferenceResult r;
  r.point = point;
  r.se = se;
  r.ci_low = point - z * se;
  r.ci_high = point + z * se;
  r.method = method;
  r.alpha = alpha;
  return r;
}

BootstrapResult bootstrap(const Dataset& ds, const EstimatorConfig& cfg,
                          double point, int B, std::uint64_t seed,
                          double alpha, int jobs) {
  if (B < 2) throw config_error("bootstrap needs B >= 2");
  const int n = ds.n();

  struct Slot {
    double theta = 0.0;
    bool ok = false;
  };
  std::vector<Slot> slots(B);

  EstimatorConfig rep_cfg = cfg;
  rep_cfg.want_se = false;
  rep_cfg.keep_bundle = false;

  parallel_for(B, resolve_jobs(jobs), [&](int r) {
    CounterRng rng = CounterRng::stream(seed, 0x626F6F74ULL, r);
    Dataset sample;
    sample.k_max = ds.k_max;
    sample.covariate_names = ds.covariate_names;
    sample.records.reserve(n);
    for (int i = 0; i < n; ++i) {
      sample.records.push_back(
          ds.records[static_cast<size_t>(rng.next_below(n))]);
    }
    try {
      if (sample.arm_count(0) == 0 || sample.arm_count(1) == 0) {
        throw numeric_error("bootstrap resample lost an arm");
      }
      slots[r].theta = run_estimator(sample, rep_cfg).theta;
      slots[r].ok = true;
    } catch (const std::exception&) {
      slots[r].ok = false;
    }
  });

  BootstrapResult out;
  for (const auto& s : slots) {
    if (s.ok) {
      out.replicate_thetas.push_back(s.theta);
    } else {
      ++out.n_failed;
    }
  }
  if (out.n_failed * 10 > B) {
    std::ostringstream os;
    os << "bootstrap: " << out.n_failed << " of " << B
       << " replicates failed (over 10%)";
    throw numeric_error(os.str());
  }
  const int m = static_cast<int>(out.replicate_thetas.size());

  double mean = 0.0;
  for (double t : out.replicate_thetas) mean += t;
  mean /= m;
  double ss = 0.0;
  for (double t : out.replicate_thetas) ss += (t - mean) * (t - mean);
  const double se = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;

  out.wald = wald_ci(point, se, alpha, CiMethod::WaldBootstrap);
  out.wald.replicates = m;
  out.wald.seed = seed;

  // Type-1 empirical quantile: the ceil(p*m)-th order statistic.
  std::vector<double> sorted = out.replicate_thetas;
  std::sort(sorted.begin(), sorted.end());
  auto type1 = [&](double p) {
    int k = static_cast<int>(std::ceil(p * m));
    k = std::min(std::max(k, 1), m);
    return sorted[k - 1];
  };
  out.percentile.point = point;
  out.percentile.se = se;
  out.percentile.ci_low = type1(alpha / 2.0);
  out.percentile.ci_high = type1(1.0 - alpha / 2.0);
  out.percentile.method = CiMethod::PercentileBootstrap;
  out.percentile.alpha = alpha;
  out.percentile.replicates = m;
  out.percentile.seed = seed;
  return out;
}

}  // namespace rmst

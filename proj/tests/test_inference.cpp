#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmst/errors.hpp"
#include "rmst/inference.hpp"
#include "rmst/rng.hpp"
#include "support/test_data.hpp"

using namespace rmst;
using namespace rmst::testing;

TEST_CASE("normal quantile against reference values") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(0.84) == doctest::Approx(0.994457883).epsilon(1e-8));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  CHECK(normal_quantile(0.025) ==
        doctest::Approx(-1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.36134089).epsilon(1e-6));
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("wald_ci reproduces the quantile arithmetic") {
  const InferenceResult r = wald_ci(0.0, 1.0, 0.05);
  CHECK(r.ci_low == doctest::Approx(-1.959964).epsilon(1e-5));
  CHECK(r.ci_high == doctest::Approx(1.959964).epsilon(1e-5));

  const InferenceResult d = wald_ci(0.7, 0.0, 0.05);
  CHECK(d.ci_low == 0.7);
  CHECK(d.ci_high == 0.7);

  const InferenceResult one = wald_ci(0.0, 2.0, 0.32);
  CHECK(one.ci_high == doctest::Approx(2.0 * 0.994457883).epsilon(1e-6));

  CHECK_THROWS_AS(wald_ci(0.0, 1.0, 0.0), config_error);
  CHECK_THROWS_AS(wald_ci(0.0, 1.0, 1.5), config_error);
  CHECK_THROWS_AS(wald_ci(0.0, -1.0, 0.05), numeric_error);
}

TEST_CASE("bootstrap of within-arm-constant data has zero spread") {
  // All subjects identical within each arm: any resample containing both
  // arms yields the same KM curves, so the replicate thetas are constant.
  std::vector<SubjectRecord> recs;
  for (int i = 0; i < 20; ++i) recs.push_back(subj("t" + std::to_string(i), 1, 3, 1));
  for (int i = 0; i < 20; ++i) recs.push_back(subj("c" + std::to_string(i), 0, 1, 1));
  const Dataset ds = make_dataset(recs, 4, {});

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::KM;
  cfg.tau = 4;
  const double point = run_estimator(ds, cfg).theta;
  const BootstrapResult br = bootstrap(ds, cfg, point, 50, 7, 0.05, 2);
  CHECK(br.wald.se == 0.0);
  CHECK(br.percentile.ci_low == br.percentile.ci_high);
  CHECK(br.n_failed == 0);
}

TEST_CASE("bootstrap is deterministic across worker counts") {
  CounterRng rng = CounterRng::stream(23, 1);
  RandomDatasetOptions opt;
  opt.n_min = 16;
  opt.n_max = 24;
  opt.require_nondegenerate_censoring = true;
  const Dataset ds = random_dataset(rng, opt);

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::KM;
  cfg.tau = ds.k_max;
  const double point = run_estimator(ds, cfg).theta;

  const BootstrapResult a = bootstrap(ds, cfg, point, 64, 99, 0.05, 1);
  const BootstrapResult b = bootstrap(ds, cfg, point, 64, 99, 0.05, 4);
  REQUIRE(a.replicate_thetas.size() == b.replicate_thetas.size());
  for (size_t r = 0; r < a.replicate_thetas.size(); ++r) {
    CHECK(a.replicate_thetas[r] == b.replicate_thetas[r]);
  }
  CHECK(a.wald.se == b.wald.se);
  CHECK(a.percentile.ci_low == b.percentile.ci_low);

  // A different seed moves the replicates.
  const BootstrapResult c = bootstrap(ds, cfg, point, 64, 100, 0.05, 2);
  bool any_diff = false;
  for (size_t r = 0; r < a.replicate_thetas.size(); ++r) {
    any_diff = any_diff || a.replicate_thetas[r] != c.replicate_thetas[r];
  }
  CHECK(any_diff);
}

TEST_CASE("percentile endpoints are order statistics (type-1 quantiles)") {
  CounterRng rng = CounterRng::stream(23, 2);
  RandomDatasetOptions opt;
  opt.n_min = 16;
  opt.n_max = 24;
  opt.require_nondegenerate_censoring = true;
  const Dataset ds = random_dataset(rng, opt);

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::KM;
  cfg.tau = ds.k_max;
  const double point = run_estimator(ds, cfg).theta;
  const BootstrapResult br = bootstrap(ds, cfg, point, 40, 3, 0.1, 2);

  std::vector<double> sorted = br.replicate_thetas;
  std::sort(sorted.begin(), sorted.end());
  const int m = static_cast<int>(sorted.size());
  const int lo = std::max(1, (int)std::ceil(0.05 * m));
  const int hi = std::min(m, (int)std::ceil(0.95 * m));
  CHECK(br.percentile.ci_low == sorted[lo - 1]);
  CHECK(br.percentile.ci_high == sorted[hi - 1]);
}

TEST_CASE("bootstrap rejects B < 2") {
  const Dataset ds = hand_dataset();
  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::KM;
  cfg.tau = 3;
  CHECK_THROWS_AS(bootstrap(ds, cfg, 0.5, 1, 1, 0.05, 1), config_error);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmst/curves.hpp"
#include "rmst/dgp.hpp"
#include "rmst/eif.hpp"
#include "rmst/long_form.hpp"
#include "support/oracles.hpp"
#include "support/test_data.hpp"

using namespace rmst;
using namespace rmst::testing;

namespace {

struct RandomBundle {
  NuisanceBundle bundle;
  std::vector<OracleSurfaces> oracle;  // one per subject
};

RandomBundle make_random_bundle(CounterRng& rng, int n, int tau) {
  RandomBundle rb;
  rb.bundle = NuisanceBundle::allocate(n, tau);
  rb.oracle.resize(n);
  for (int i = 0; i < n; ++i) {
    OracleSurfaces& s = rb.oracle[i];
    s.tau = tau;
    s.h1.assign(tau, 0.0);
    s.h0.assign(tau, 0.0);
    s.g1.assign(tau, 0.0);
    s.g0.assign(tau, 0.0);
    s.ga1 = 0.3 + 0.4 * rng.next_double();
    rb.bundle.g_a1[i] = s.ga1;
    for (int m = 1; m <= tau - 1; ++m) {
      s.h1[m] = 0.05 + 0.5 * rng.next_double();
      s.h0[m] = 0.05 + 0.5 * rng.next_double();
      rb.bundle.h.at(i, 1, m) = s.h1[m];
      rb.bundle.h.at(i, 0, m) = s.h0[m];
    }
    for (int m = 0; m <= tau - 2; ++m) {
      s.g1[m] = 0.05 + 0.3 * rng.next_double();
      s.g0[m] = 0.05 + 0.3 * rng.next_double();
      rb.bundle.g_r.at(i, 1, m) = s.g1[m];
      rb.bundle.g_r.at(i, 0, m) = s.g0[m];
    }
  }
  rb.bundle.refresh();
  return rb;
}

}  // namespace

TEST_CASE("aux_Z closed-form spot values") {
  // tau=2, S=G=1, gA=0.5: Z_a(1) = -1/(0.5*1) = -2 when arms match.
  NuisanceBundle b = NuisanceBundle::allocate(1, 2);
  b.refresh();
  CHECK(aux_z(b, 0, 1, 1, 1) == doctest::Approx(-2.0));
  CHECK(aux_z(b, 0, 1, 0, 1) == 0.0);  // indicator mismatch
  CHECK(aux_z(b, 0, 0, 1, 1) == 0.0);
}

TEST_CASE("aux_H sign flips with the observed arm") {
  NuisanceBundle b = NuisanceBundle::allocate(1, 2);
  b.refresh();
  CHECK(aux_h(b, 0, 1, 0) == doctest::Approx(-2.0));
  CHECK(aux_h(b, 0, 0, 0) == doctest::Approx(2.0));
}

TEST_CASE("aux_M spot values") {
  NuisanceBundle b = NuisanceBundle::allocate(1, 2);
  b.refresh();
  CHECK(aux_m(b, 0) == doctest::Approx(4.0));

  // Dead-by-1 surfaces: M = 0.
  b.h.at(0, 1, 1) = 1.0;
  b.h.at(0, 0, 1) = 1.0;
  b.refresh();
  CHECK(aux_m(b, 0) == doctest::Approx(0.0));
}

TEST_CASE("auxiliary covariates agree with naive-summation oracles") {
  CounterRng rng = CounterRng::stream(13, 1);
  for (int rep = 0; rep < 10; ++rep) {
    const int tau = 2 + static_cast<int>(rng.next_below(6));
    RandomBundle rb = make_random_bundle(rng, 4, tau);
    for (int i = 0; i < 4; ++i) {
      for (int a_obs = 0; a_obs <= 1; ++a_obs) {
        for (int m = 1; m <= tau - 1; ++m) {
          for (int a_t = 0; a_t <= 1; ++a_t) {
            CHECK(aux_z(rb.bundle, i, a_t, a_obs, m) ==
                  doctest::Approx(aux_z_oracle(rb.oracle[i], a_t, a_obs, m))
                      .epsilon(1e-12));
          }
        }
        for (int m = 0; m <= tau - 2; ++m) {
          CHECK(aux_h(rb.bundle, i, a_obs, m) ==
                doctest::Approx(aux_h_oracle(rb.oracle[i], a_obs, m))
                    .epsilon(1e-12));
        }
      }
      CHECK(aux_m(rb.bundle, i) ==
            doctest::Approx(aux_m_oracle(rb.oracle[i])).epsilon(1e-12));
    }
  }
}

TEST_CASE("eval_eif: zero residuals and equal arms give zero") {
  Dataset ds = make_dataset({subj("a", 1, 4, 0), subj("b", 0, 4, 0)}, 4, {});
  NuisanceBundle b = NuisanceBundle::allocate(2, 4);
  b.refresh();
  const EifValue v = eval_eif(b, ds, 0, 0.0);
  CHECK(v.martingale == 0.0);
  CHECK(v.plug_in == 0.0);
  CHECK(v.total() == 0.0);
}

TEST_CASE("eval_eif hand substitution at tau=2") {
  Dataset ds = make_dataset({subj("a", 1, 1, 1), subj("b", 0, 1, 0)}, 2, {});
  NuisanceBundle b = NuisanceBundle::allocate(2, 2);
  for (int i = 0; i < 2; ++i) {
    b.h.at(i, 1, 1) = 0.3;
    b.h.at(i, 0, 1) = 0.2;
    b.g_r.at(i, 1, 0) = 0.1;
    b.g_r.at(i, 0, 0) = 0.1;
    b.g_a1[i] = 0.6;
  }
  b.refresh();
  // Subject a: arm 1, event at 1. Z = -1/(0.6 * 0.9); residual 1 - 0.3.
  const double z = -1.0 / (0.6 * 0.9);
  const double expected = z * 0.7 + (0.7 - 0.8) - 0.05;
  const EifValue v = eval_eif(b, ds, 0, 0.05);
  CHECK(v.total() == doctest::Approx(expected).epsilon(1e-14));

  // Subject b: arm 0, censored at 1: at event risk at m=1 with L=0.
  const double z0 = 1.0 / (0.4 * 0.9);
  const double expected_b = z0 * (0.0 - 0.2) + (0.7 - 0.8) - 0.05;
  CHECK(eval_eif(b, ds, 1, 0.05).total() ==
        doctest::Approx(expected_b).epsilon(1e-14));
}

TEST_CASE("eval_eif agrees with the formula-transcription oracle") {
  CounterRng rng = CounterRng::stream(13, 2);
  for (int rep = 0; rep < 10; ++rep) {
    const int tau = 2 + static_cast<int>(rng.next_below(5));
    const int n = 6;
    RandomBundle rb = make_random_bundle(rng, n, tau);
    std::vector<SubjectRecord> recs;
    for (int i = 0; i < n; ++i) {
      recs.push_back(subj("s" + std::to_string(i), i % 2,
                          rng.next_bernoulli(0.3)
                              ? static_cast<int>(rng.next_below(tau + 1))
                              : 1 + static_cast<int>(rng.next_below(tau)),
                          0));
      if (recs.back().time >= 1 && rng.next_bernoulli(0.6)) {
        recs.back().event = 1;
      }
    }
    Dataset ds = make_dataset(recs, tau, {});
    for (int i = 0; i < n; ++i) {
      OracleSubject o{ds.records[i].arm, ds.records[i].time,
                      ds.records[i].event};
      CHECK(eval_eif(rb.bundle, ds, i, 0.37).total() ==
            doctest::Approx(eif_oracle(rb.oracle[i], o, 0.37))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("sample mean of eval_eif equals theta_aipw minus theta") {
  CounterRng rng = CounterRng::stream(13, 3);
  RandomDatasetOptions opt;
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset ds = random_dataset(rng, opt);
    const int tau = ds.k_max;
    RandomBundle rb = make_random_bundle(rng, ds.n(), tau);
    const double aipw = theta_aipw(rb.bundle, ds);
    for (double theta : {0.0, 0.8, -1.3}) {
      double mean = 0.0;
      for (int i = 0; i < ds.n(); ++i) {
        mean += eval_eif(rb.bundle, ds, i, theta).total();
      }
      mean /= ds.n();
      CHECK(mean == doctest::Approx(aipw - theta).epsilon(1e-11));
    }
  }
}

TEST_CASE("eval_d_km is zero when residuals vanish") {
  MarginalBundle mb;
  mb.tau = 3;
  for (int a = 0; a <= 1; ++a) {
    mb.h[a].assign(3, 0.0);
    mb.surv[a].assign(3, 1.0);
    mb.cens[a].assign(3, 1.0);
  }
  mb.g_a1 = 0.5;
  // No events through tau-1 and h = 0: every residual is zero.
  CHECK(eval_d_km(mb, subj("a", 1, 3, 0), 3) == 0.0);
}

TEST_CASE("eval_d_km equals the w-free EIF martingale part") {
  CounterRng rng = CounterRng::stream(13, 4);
  RandomDatasetOptions opt;
  opt.require_nondegenerate_censoring = true;
  for (int rep = 0; rep < 15; ++rep) {
    const Dataset ds = random_dataset(rng, opt);
    const int tau = ds.k_max;
    const MarginalBundle mb = marginal_bundle_km(ds, tau);
    const NuisanceBundle nb = broadcast_marginal(mb, ds.n());
    for (int i = 0; i < ds.n(); ++i) {
      const double dkm = eval_d_km(mb, ds.records[i], ds.k_max);
      const EifValue v = eval_eif(nb, ds, i, 0.0);
      CHECK(dkm == doctest::Approx(v.martingale).epsilon(1e-11));
    }
  }
}

TEST_CASE("plug-in D_km variance tracks the Monte Carlo variance of "
          "theta_km") {
  DgpConfig cfg;
  cfg.n = 300;
  cfg.k_max = 8;
  cfg.tau = 8;
  cfg.scenario = Scenario::C;
  cfg.censoring = CensoringModel::NonInformative;
  cfg.cens_intercept_noninf = -3.0;
  cfg.cens_slope = 0.0;
  cfg.alpha0 = -2.0;
  cfg.effect = EffectType::Zero;

  const int reps = 2000;
  double mean_theta = 0.0, ss = 0.0, mean_plugin = 0.0;
  std::vector<double> thetas(reps);
  for (int r = 0; r < reps; ++r) {
    cfg.seed = CounterRng::stream(99, r).key();
    const Dataset ds = gen_trial(cfg);
    const ThetaByCurves km = theta_km(ds, cfg.tau);
    thetas[r] = km.theta;
    mean_theta += km.theta;

    const MarginalBundle mb = marginal_bundle_km(ds, cfg.tau);
    double m = 0.0, s2 = 0.0;
    std::vector<double> d(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
      d[i] = eval_d_km(mb, ds.records[i], ds.k_max);
      m += d[i];
    }
    m /= ds.n();
    for (double v : d) s2 += (v - m) * (v - m);
    mean_plugin += s2 / (ds.n() - 1) / ds.n();
  }
  mean_theta /= reps;
  for (double t : thetas) ss += (t - mean_theta) * (t - mean_theta);
  const double mc_var = ss / (reps - 1);
  mean_plugin /= reps;
  CHECK(std::abs(mean_plugin - mc_var) / mc_var < 0.10);
}

TEST_CASE("eval_d_car hand substitution and trivial zero") {
  Dataset ds = make_dataset({subj("a", 1, 1, 1), subj("b", 0, 0, 0)}, 2, {});
  NuisanceBundle b = NuisanceBundle::allocate(2, 2);
  for (int i = 0; i < 2; ++i) {
    b.h.at(i, 1, 1) = 0.3;
    b.h.at(i, 0, 1) = 0.2;
    b.g_r.at(i, 1, 0) = 0.1;
    b.g_r.at(i, 0, 0) = 0.25;
    b.g_a1[i] = 0.5;
  }
  b.refresh();

  // Subject a (arm 1, event at 1): M(W)(A - gA1) + J_0 H(0) (R_0 - gR(0)).
  // M = 0.7/0.5 + 0.8/0.5 = 3; H(0,1) = -(q0-1)/(0.5 * G(1,1)).
  const double h0 = -0.7 / (0.5 * 0.9);
  const double expected_a = 3.0 * (1 - 0.5) + h0 * (0.0 - 0.1);
  CHECK(eval_d_car(b, ds, 0) == doctest::Approx(expected_a).epsilon(1e-14));

  // Subject b (arm 0, censored at 0): R_0 = 1, H carries the sign flip.
  const double h0b = 0.8 / (0.5 * 0.75);
  const double expected_b = 3.0 * (0 - 0.5) + h0b * (1.0 - 0.25);
  CHECK(eval_d_car(b, ds, 1) == doctest::Approx(expected_b).epsilon(1e-14));

  // gA(1,W) = 1 with A = 1 and no censoring residuals: exactly zero.
  NuisanceBundle b2 = NuisanceBundle::allocate(2, 2);
  for (int i = 0; i < 2; ++i) b2.g_a1[i] = 1.0;
  b2.refresh();
  Dataset ds2 = make_dataset({subj("a", 1, 2, 0), subj("b", 0, 2, 0)}, 2, {});
  CHECK(eval_d_car(b2, ds2, 0) == 0.0);
}

TEST_CASE("theta_aipw reduces to the substitution value at zero residuals") {
  // Event-free subjects with a zero hazard grid: every martingale term is
  // zero, so only the plug-in sum remains (zero here since h1 = h0 = 0).
  Dataset ds = make_dataset({subj("a", 1, 3, 0), subj("b", 0, 3, 0)}, 3, {});
  NuisanceBundle b = NuisanceBundle::allocate(2, 3);
  b.refresh();
  CHECK(theta_aipw(b, ds) == 0.0);

  // Unequal hazard surfaces with the same residual-free paths: the value
  // must equal the mean EIF at theta = 0 (cross-route identity).
  NuisanceBundle b2 = NuisanceBundle::allocate(2, 3);
  for (int i = 0; i < 2; ++i) {
    for (int m = 1; m <= 2; ++m) {
      b2.h.at(i, 1, m) = 0.1;
      b2.h.at(i, 0, m) = 0.4;
    }
  }
  b2.refresh();
  double mean_eif0 = 0.0;
  for (int i = 0; i < 2; ++i) {
    mean_eif0 += eval_eif(b2, ds, i, 0.0).total();
  }
  CHECK(theta_aipw(b2, ds) == doctest::Approx(mean_eif0 / 2).epsilon(1e-12));
}

TEST_CASE("theta_aipw with saturated covariate-free fits equals theta_km") {
  CounterRng rng = CounterRng::stream(13, 5);
  RandomDatasetOptions opt;
  opt.require_nondegenerate_censoring = true;
  for (int rep = 0; rep < 25; ++rep) {
    const Dataset ds = random_dataset(rng, opt);
    const int tau = ds.k_max;
    const NuisanceBundle nb = broadcast_marginal(marginal_bundle_km(ds, tau),
                                                 ds.n());
    const double aipw = theta_aipw(nb, ds);
    const double km = theta_km(ds, tau).theta;
    CHECK(aipw == doctest::Approx(km).epsilon(1e-10));
  }
}

TEST_CASE("theta_aipw matches a brute-force double-sum oracle") {
  CounterRng rng = CounterRng::stream(13, 6);
  for (int rep = 0; rep < 10; ++rep) {
    const int tau = 4;
    const int n = 6;
    RandomBundle rb = make_random_bundle(rng, n, tau);
    std::vector<SubjectRecord> recs;
    for (int i = 0; i < n; ++i) {
      const int time = 1 + static_cast<int>(rng.next_below(tau));
      recs.push_back(subj("s" + std::to_string(i), i % 2, time,
                          rng.next_bernoulli(0.6) ? 1 : 0));
    }
    Dataset ds = make_dataset(recs, tau, {});

    double brute = 0.0;
    for (int i = 0; i < n; ++i) {
      const OracleSurfaces& s = rb.oracle[i];
      const OracleSubject o{ds.records[i].arm, ds.records[i].time,
                            ds.records[i].event};
      const int a = o.arm;
      for (int m = 1; m <= tau - 1; ++m) {
        if (o.at_event_risk(m)) {
          double tail = 0.0;
          for (int t = m; t <= tau - 1; ++t) {
            tail += (2.0 * a - 1.0) / (s.ga(a) * s.G(m, a)) * s.S(t, a) /
                    s.S(m, a);
          }
          brute -= tail * (o.l_at(m) - s.h(m, a));
        }
        brute += s.S(m, 1) - s.S(m, 0);
      }
    }
    brute /= n;
    CHECK(theta_aipw(rb.bundle, ds) == doctest::Approx(brute).epsilon(1e-12));
  }
}

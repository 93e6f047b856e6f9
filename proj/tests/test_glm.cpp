#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmst/design.hpp"
#include "rmst/errors.hpp"
#include "rmst/logistic.hpp"
#include "rmst/model_spec.hpp"
#include "support/oracles.hpp"
#include "support/test_data.hpp"

using namespace rmst;
using namespace rmst::testing;

namespace {

DesignMatrix dense_design(const Eigen::MatrixXd& X) {
  DesignMatrix d;
  d.cols = static_cast<int>(X.cols());
  d.row_ptr.push_back(0);
  for (int r = 0; r < X.rows(); ++r) {
    for (int c = 0; c < X.cols(); ++c) {
      if (X(r, c) != 0.0) {
        d.col_idx.push_back(c);
        d.values.push_back(X(r, c));
      }
    }
    d.row_ptr.push_back(static_cast<int>(d.col_idx.size()));
  }
  for (int c = 0; c < X.cols(); ++c) d.col_names.push_back("x");
  return d;
}

}  // namespace

TEST_CASE("model grammar parses and counts columns") {
  const std::vector<std::string> names = {"w1", "w2", "w3", "age"};
  Dataset ds =
      make_dataset({subj("a", 1, 1, 1, {0, 0, 0, 0}), subj("b", 0, 2, 0, {0, 0, 0, 0})},
                   3, names);

  const ModelSpec s1 =
      parse_model_spec("1", ResponseRole::EventHazard, names);
  std::vector<ModelRow> rows = {{0, 1, 1, 1.0}, {1, 1, 0, 0.0}, {1, 2, 0, 0.0}};
  CHECK(build_design(s1, ds, rows).cols == 1);

  // saturated with K=3, event role: 1 + 3 + 1 + 3 = 8 columns.
  const ModelSpec sat =
      parse_model_spec("saturated(t,a)", ResponseRole::EventHazard, names);
  CHECK(build_design(sat, ds, rows).cols == 8);

  const ModelSpec s3 = parse_model_spec("1 + w1 + a:w3",
                                        ResponseRole::EventHazard, names);
  CHECK(build_design(s3, ds, rows).cols == 3);

  // Named covariates and interactions.
  const ModelSpec s4 =
      parse_model_spec("1 + age + a:age", ResponseRole::EventHazard, names);
  CHECK(build_design(s4, ds, rows).cols == 3);

  CHECK_THROWS_AS(parse_model_spec("1 + zzz", ResponseRole::EventHazard, names),
                  config_error);
  CHECK_THROWS_AS(parse_model_spec("1 + w9", ResponseRole::EventHazard, names),
                  config_error);
  CHECK_THROWS_AS(parse_model_spec("", ResponseRole::EventHazard, names),
                  config_error);
  CHECK_THROWS_AS(parse_model_spec("1 + t", ResponseRole::Treatment, names),
                  config_error);

  // Censoring role indexes the time factor from 0.
  const ModelSpec gr =
      parse_model_spec("saturated(t,a)", ResponseRole::CensoringHazard, names);
  const DesignMatrix Xgr = build_design(gr, ds, rows);
  CHECK(Xgr.col_names[1] == "t=0");
}

TEST_CASE("intercept-only fits recover the Bernoulli MLE") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
  const DesignMatrix d = dense_design(X);

  std::vector<double> y = {1, 0, 1, 0};
  LogisticFit fit = fit_logistic(d, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.coefficients[0]) < 1e-9);

  y = {1, 1, 1, 0};
  fit = fit_logistic(d, y);
  CHECK(fit.coefficients[0] == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(!fit.ridge_used);
}

TEST_CASE("predict_prob applies the inverse logit and clamp") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);
  const DesignMatrix d = dense_design(X);
  LogisticFit fit;
  fit.coefficients = {0.0};
  CHECK(predict_prob(fit, d)[0] == doctest::Approx(0.5));
  fit.coefficients = {std::log(3.0)};
  CHECK(predict_prob(fit, d)[0] == doctest::Approx(0.75).epsilon(1e-12));
  fit.coefficients = {40.0};
  CHECK(predict_prob(fit, d)[0] == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));

  LogisticFit bad;
  bad.coefficients = {0.0, 0.0};
  CHECK_THROWS_AS(predict_prob(bad, d), numeric_error);
}

TEST_CASE("fit matches the independent Newton oracle with offsets") {
  CounterRng rng = CounterRng::stream(7, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 20, p = 3;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd off(n), yv(n);
    for (int r = 0; r < n; ++r) {
      X(r, 0) = 1.0;
      for (int c = 1; c < p; ++c) X(r, c) = rng.next_normal();
      off(r) = 0.5 * rng.next_normal();
      yv(r) = rng.next_bernoulli(0.3 + 0.4 * (r % 2)) ? 1.0 : 0.0;
    }
    // Keep the instance away from separation.
    yv(0) = 1.0;
    yv(1) = 0.0;

    const Eigen::VectorXd oracle = newton_logistic_oracle(X, yv, off);
    if (oracle.lpNorm<Eigen::Infinity>() > 8.0) continue;  // near-separated

    const DesignMatrix d = dense_design(X);
    std::vector<double> y(yv.data(), yv.data() + n);
    std::vector<double> offset(off.data(), off.data() + n);
    const LogisticFit fit = fit_logistic(d, y, offset);
    REQUIRE(fit.converged);
    for (int c = 0; c < p; ++c) {
      CHECK(fit.coefficients[c] == doctest::Approx(oracle(c)).epsilon(1e-6));
    }
  }
}

TEST_CASE("converged unpenalized fits satisfy the score identity") {
  CounterRng rng = CounterRng::stream(7, 2);
  const int n = 60, p = 4;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd yv(n);
  for (int r = 0; r < n; ++r) {
    X(r, 0) = 1.0;
    for (int c = 1; c < p; ++c) X(r, c) = rng.next_normal();
    yv(r) = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
  }
  const DesignMatrix d = dense_design(X);
  std::vector<double> y(yv.data(), yv.data() + n);
  const LogisticFit fit = fit_logistic(d, y);
  REQUIRE(fit.converged);
  REQUIRE(!fit.ridge_used);
  CHECK(fit.grad_inf_norm <= 1e-8 * n);
}

TEST_CASE("deviance history is non-increasing") {
  CounterRng rng = CounterRng::stream(7, 3);
  const int n = 40, p = 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd yv(n);
  for (int r = 0; r < n; ++r) {
    X(r, 0) = 1.0;
    for (int c = 1; c < p; ++c) X(r, c) = rng.next_normal();
    yv(r) = rng.next_bernoulli(0.4) ? 1.0 : 0.0;
  }
  const DesignMatrix d = dense_design(X);
  std::vector<double> y(yv.data(), yv.data() + n);
  const LogisticFit fit = fit_logistic(d, y);
  for (size_t i = 1; i < fit.deviance_history.size(); ++i) {
    CHECK(fit.deviance_history[i] <=
          fit.deviance_history[i - 1] + 1e-9 * (1 + fit.deviance_history[i]));
  }
}

TEST_CASE("offset at the saturated MLE gives a zero fluctuation") {
  // Response grouped in 2 cells; offset = logit of the cell means; a
  // cell-constant covariate lies in the solved score span, so epsilon = 0.
  const int n = 10;
  Eigen::MatrixXd Z(n, 1);
  Eigen::VectorXd off(n), yv(n);
  // Cell A: rows 0..4, mean 0.6; cell B: rows 5..9, mean 0.2.
  for (int r = 0; r < 5; ++r) {
    yv(r) = r < 3 ? 1.0 : 0.0;
    off(r) = std::log(0.6 / 0.4);
    Z(r, 0) = 2.0;
  }
  for (int r = 5; r < n; ++r) {
    yv(r) = r == 5 ? 1.0 : 0.0;
    off(r) = std::log(0.2 / 0.8);
    Z(r, 0) = -1.0;
  }
  const Eigen::VectorXd oracle = newton_logistic_oracle(Z, yv, off);
  CHECK(std::abs(oracle(0)) < 1e-10);

  const DesignMatrix d = dense_design(Z);
  std::vector<double> y(yv.data(), yv.data() + n);
  std::vector<double> offset(off.data(), off.data() + n);
  const LogisticFit fit = fit_logistic(d, y, offset);
  CHECK(std::abs(fit.coefficients[0]) < 1e-9);
}

TEST_CASE("all-identical responses stall at the clamp without crashing") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(6, 1);
  const DesignMatrix d = dense_design(X);
  std::vector<double> y(6, 0.0);
  const LogisticFit fit = fit_logistic(d, y);
  CHECK(fit.converged);
  const double p = expit(fit.coefficients[0]);
  CHECK(p <= 2e-6);  // pinned at (or numerically below) the clamp floor
}

TEST_CASE("exactly collinear columns are aliased deterministically") {
  // x2 = 2*x1: the second column must be dropped, not ridged.
  Eigen::MatrixXd X(6, 3);
  CounterRng rng = CounterRng::stream(7, 4);
  for (int r = 0; r < 6; ++r) {
    X(r, 0) = 1.0;
    X(r, 1) = rng.next_normal();
    X(r, 2) = 2.0 * X(r, 1);
  }
  const DesignMatrix d = dense_design(X);
  std::vector<double> y = {1, 0, 1, 0, 1, 0};
  const LogisticFit fit = fit_logistic(d, y);
  CHECK(!fit.ridge_used);
  REQUIRE(fit.aliased.size() == 3);
  CHECK(fit.aliased[2] == 1);
  CHECK(fit.coefficients[2] == 0.0);
}

TEST_CASE("empty subset is an error") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
  const DesignMatrix d = dense_design(X);
  std::vector<double> y = {1, 0, 1};
  std::vector<unsigned char> subset = {0, 0, 0};
  CHECK_THROWS_AS(fit_logistic(d, y, {}, subset), numeric_error);
}

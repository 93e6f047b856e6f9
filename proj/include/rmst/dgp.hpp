#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "rmst/data.hpp"

namespace rmst {

// Covariate-outcome association scenarios: A keeps the drawn covariates,
// B replaces them with fresh independent draws half the time, C always
// (making W independent of T).
enum class Scenario { A, B, C };
enum class CensoringModel { NonInformative, Informative, None };
enum class EffectType { Zero, Positive };

const char* scenario_name(Scenario s);
const char* censoring_name(CensoringModel c);
Scenario scenario_from_name(const std::string&);
CensoringModel censoring_from_name(const std::string&);

// Synthetic surrogate trial generator. Control event times follow the
// discrete-time hazard logit h0(t, W) = alpha0 + alpha1 * t + beta'W over
// t = 1..K with five standard-normal covariates; a positive effect adds a
// rounded chi-square(mean = effect_mean) draw to treated subjects' event
// times. Drop-out hazards follow the two logistic censoring models
// (intercepts/slope configurable for reduced-horizon variants); subjects
// never censored by K are administratively censored there.
struct DgpConfig {
  int n = 500;
  int k_max = 180;
  int tau = 180;
  Scenario scenario = Scenario::A;
  CensoringModel censoring = CensoringModel::NonInformative;
  EffectType effect = EffectType::Zero;
  double effect_mean = 56.0;  // chi-square df, so also its mean
  std::array<double, 5> beta = {std::log(1.5), std::log(0.9), std::log(1.7),
                                std::log(1.0), std::log(1.1)};
  double alpha0 = -6.3984375;  // see data/dgp_fixtures.json
  double alpha1 = 0.0;
  double cens_intercept_noninf = -5.5;
  double cens_intercept_inf = -6.5;
  double cens_slope = 0.007;
  std::uint64_t seed = 0;
};

Dataset gen_trial(const DgpConfig& cfg);

// Calibrated configurations pinned in data/dgp_fixtures.json: the full
// 180-day horizon (29% control mortality, oracle theta ~14.9 under the
// positive effect) and a faster 30-day variant (theta ~4.0).
DgpConfig calibrated_dgp_full();
DgpConfig calibrated_dgp_reduced();

// Monte Carlo value of the estimand for a configuration: both potential
// event times are generated from the same latent draws, with the effect
// shift applied or withheld, so a zero effect gives exactly zero.
double oracle_theta(const DgpConfig& cfg, long n_mc, std::uint64_t seed);

struct CalibrationTargets {
  double control_mortality = 0.29;  // P(T0 <= horizon)
  double theta = 14.9;
  double mortality_tol = 0.005;   // absolute
  double theta_rel_tol = 0.005;   // relative to the target
};

struct CalibrationResult {
  double alpha0 = 0.0;
  double mu = 0.0;
  double achieved_mortality = 0.0;
  double achieved_theta = 0.0;
  double dropout_noninformative = 0.0;  // share censored before K
  double dropout_informative = 0.0;
};

// Bisection on alpha0 (control mortality at the horizon) then on mu
// (oracle theta), each target evaluated by common-random-number Monte
// Carlo so the response is deterministic and monotone in its knob.
// Throws numeric_error if an initial bracket does not straddle the target.
CalibrationResult calibrate(DgpConfig base, const CalibrationTargets& targets,
                            long n_mc, std::uint64_t seed);

}  // namespace rmst

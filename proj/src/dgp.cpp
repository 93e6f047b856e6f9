#include "rmst/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "rmst/errors.hpp"
#include "rmst/logistic.hpp"
#include "rmst/rng.hpp"

namespace rmst {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
  }
  return "?";
}

const char* censoring_name(CensoringModel c) {
  switch (c) {
    case CensoringModel::NonInformative: return "non_informative";
    case CensoringModel::Informative: return "informative";
    case CensoringModel::None: return "none";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& s) {
  if (s == "A" || s == "a") return Scenario::A;
  if (s == "B" || s == "b") return Scenario::B;
  if (s == "C" || s == "c") return Scenario::C;
  throw config_error("unknown scenario '" + s + "'");
}

CensoringModel censoring_from_name(const std::string& s) {
  if (s == "non_informative" || s == "noninformative") {
    return CensoringModel::NonInformative;
  }
  if (s == "informative") return CensoringModel::Informative;
  if (s == "none") return CensoringModel::None;
  throw config_error("unknown censoring model '" + s + "'");
}

namespace {

constexpr int kInfinity = 1 << 29;  // event beyond the horizon

// Latent control event time given covariates; kInfinity when no event by K.
int draw_control_time(const DgpConfig& cfg, const std::array<double, 5>& w,
                      CounterRng& rng) {
  double bw = 0.0;
  for (int j = 0; j < 5; ++j) bw += cfg.beta[j] * w[j];
  const bool flat = cfg.alpha1 == 0.0;
  const double flat_haz = flat ? expit(cfg.alpha0 + bw) : 0.0;
  for (int t = 1; t <= cfg.k_max; ++t) {
    const double haz =
        flat ? flat_haz : expit(cfg.alpha0 + cfg.alpha1 * t + bw);
    if (rng.next_bernoulli(haz)) return t;
  }
  return kInfinity;
}

double censor_logit(const DgpConfig& cfg, int t, int arm,
                    const std::array<double, 5>& w) {
  if (cfg.censoring == CensoringModel::NonInformative) {
    return cfg.cens_intercept_noninf + cfg.cens_slope * t;
  }
  return cfg.cens_intercept_inf + cfg.cens_slope * t +
         0.6 * w[2] * arm + 0.3 * (w[0] + w[4]);
}

}  // namespace

DgpConfig calibrated_dgp_full() {
  DgpConfig cfg;
  cfg.k_max = 180;
  cfg.tau = 180;
  cfg.alpha0 = -6.3984375;
  cfg.alpha1 = 0.0;
  cfg.effect_mean = 60.2265625;
  return cfg;
}

DgpConfig calibrated_dgp_reduced() {
  DgpConfig cfg;
  cfg.k_max = 30;
  cfg.tau = 30;
  cfg.alpha0 = -4.59375;
  cfg.alpha1 = 0.0;
  cfg.effect_mean = 21.26171875;
  return cfg;
}

Dataset gen_trial(const DgpConfig& cfg) {
  Dataset ds;
  ds.k_max = cfg.k_max;
  for (int j = 1; j <= 5; ++j) {
    ds.covariate_names.push_back("w" + std::to_string(j));
  }
  ds.records.reserve(cfg.n);

  CounterRng rng = CounterRng::stream(cfg.seed, 0x7472ULL);
  for (int i = 0; i < cfg.n; ++i) {
    std::array<double, 5> w;
    for (double& v : w) v = rng.next_normal();

    int t_event = draw_control_time(cfg, w, rng);

    // Scenario B/C: replace the recorded covariates after the event draw.
    const bool replace = cfg.scenario == Scenario::C ||
                         (cfg.scenario == Scenario::B && rng.next_bernoulli(0.5));
    if (replace) {
      for (double& v : w) v = rng.next_normal();
    }

    const int arm = rng.next_bernoulli(0.5) ? 1 : 0;
    if (cfg.effect == EffectType::Positive && arm == 1 &&
        t_event != kInfinity) {
      t_event += static_cast<int>(std::llround(rng.next_chisq(cfg.effect_mean)));
      if (t_event > cfg.k_max) t_event = kInfinity;
    }

    int c = cfg.k_max;
    if (cfg.censoring != CensoringModel::None) {
      const int limit = std::min(t_event, cfg.k_max);
      for (int t = 0; t <= limit - 1; ++t) {
        if (rng.next_bernoulli(expit(censor_logit(cfg, t, arm, w)))) {
          c = t;
          break;
        }
      }
    }

    SubjectRecord rec;
    rec.id = "s" + std::to_string(i + 1);
    rec.w.assign(w.begin(), w.end());
    rec.arm = arm;
    if (t_event <= c) {
      rec.event = 1;
      rec.time = t_event;
    } else {
      rec.event = 0;
      rec.time = c;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

double oracle_theta(const DgpConfig& cfg, long n_mc, std::uint64_t seed) {
  CounterRng rng = CounterRng::stream(seed, 0x6F7261ULL);
  double acc = 0.0;
  for (long i = 0; i < n_mc; ++i) {
    std::array<double, 5> w;
    for (double& v : w) v = rng.next_normal();
    const int t0 = draw_control_time(cfg, w, rng);
    int t1 = t0;
    if (cfg.effect == EffectType::Positive && t0 != kInfinity) {
      t1 = t0 + static_cast<int>(std::llround(rng.next_chisq(cfg.effect_mean)));
    }
    const double m1 = std::min(t1, cfg.tau);
    const double m0 = std::min(t0, cfg.tau);
    acc += m1 - m0;
  }
  return acc / n_mc;
}

namespace {

// P(T0 <= horizon) under the control hazard, by common-random-number MC.
double control_mortality(const DgpConfig& cfg, int horizon, long n_mc,
                         std::uint64_t seed) {
  CounterRng rng = CounterRng::stream(seed, 0x6D6F72ULL);
  long deaths = 0;
  for (long i = 0; i < n_mc; ++i) {
    std::array<double, 5> w;
    for (double& v : w) v = rng.next_normal();
    const int t0 = draw_control_time(cfg, w, rng);
    deaths += (t0 <= horizon);
  }
  return static_cast<double>(deaths) / n_mc;
}

// Share of subjects censored by drop-out (before K) in a large trial.
double dropout_fraction(DgpConfig cfg, long n_mc, std::uint64_t seed) {
  cfg.n = static_cast<int>(n_mc);
  cfg.seed = seed;
  const Dataset ds = gen_trial(cfg);
  long dropped = 0;
  for (const auto& rec : ds.records) {
    dropped += (rec.event == 0 && rec.time < cfg.k_max);
  }
  return static_cast<double>(dropped) / ds.n();
}

double bisect(double lo, double hi, double target, double tol,
              const std::function<double(double)>& f, const char* label) {
  double flo = f(lo), fhi = f(hi);
  if ((flo - target) * (fhi - target) > 0.0) {
    std::ostringstream os;
    os << "calibrate: bracket [" << lo << ", " << hi << "] does not straddle "
       << label << " target " << target << " (f: " << flo << ", " << fhi
       << ")";
    throw numeric_error(os.str());
  }
  double mid = 0.5 * (lo + hi), fmid = flo;
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (lo + hi);
    fmid = f(mid);
    if (std::abs(fmid - target) <= tol) break;
    if ((fmid - target) * (flo - target) > 0.0) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace

CalibrationResult calibrate(DgpConfig base, const CalibrationTargets& targets,
                            long n_mc, std::uint64_t seed) {
  CalibrationResult out;

  base.effect = EffectType::Zero;
  out.alpha0 = bisect(
      -14.0, 0.0, targets.control_mortality, targets.mortality_tol,
      [&](double a0) {
        DgpConfig c = base;
        c.alpha0 = a0;
        return control_mortality(c, c.k_max, n_mc, seed);
      },
      "control mortality");
  base.alpha0 = out.alpha0;
  out.achieved_mortality = control_mortality(base, base.k_max, n_mc, seed);

  if (targets.theta == 0.0) {
    // Zero-effect fixture: no shift at all.
    out.mu = 0.0;
    base.effect = EffectType::Zero;
    out.achieved_theta = 0.0;
  } else {
    base.effect = EffectType::Positive;
    const double theta_tol = targets.theta_rel_tol * targets.theta;
    out.mu = bisect(
        1.0, 400.0, targets.theta, theta_tol,
        [&](double mu) {
          DgpConfig c = base;
          c.effect_mean = mu;
          return oracle_theta(c, n_mc, seed);
        },
        "oracle theta");
    base.effect_mean = out.mu;
    out.achieved_theta = oracle_theta(base, n_mc, seed);
  }

  DgpConfig drop = base;
  drop.censoring = CensoringModel::NonInformative;
  out.dropout_noninformative = dropout_fraction(drop, n_mc / 4, seed + 1);
  drop.censoring = CensoringModel::Informative;
  out.dropout_informative = dropout_fraction(drop, n_mc / 4, seed + 2);
  return out;
}

}  // namespace rmst

// Command-line front end: trial estimation from CSV, curve export, the
// simulation-study driver, and the DGP calibration helper.

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmst/csv.hpp"
#include "rmst/long_form.hpp"
#include "rmst/dgp.hpp"
#include "rmst/errors.hpp"
#include "rmst/inference.hpp"
#include "rmst/parallel.hpp"
#include "rmst/report.hpp"
#include "rmst/study.hpp"
#include "rmst/version.hpp"

namespace {

using nlohmann::json;
using namespace rmst;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitConfig = 4;

std::string join_args(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) {
    if (i) os << ' ';
    os << argv[i];
  }
  return os.str();
}

struct EstimateArgs {
  std::string input, out, dump_long, dump_eif, boot_dump;
  int tau = 0, k = 0, boot = 0, jobs = 0;
  std::uint64_t seed = 20240901;
  double alpha = 0.05;
  double clamp_lo = 1e-6;
  std::string estimator = "all";
  std::string h_spec, gr_spec, ga_spec;
  bool allow_unsaturated_gr = false;
};

int cmd_estimate(const EstimateArgs& a, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = read_trial_csv(a.input, a.k);
  const int tau = a.tau > 0 ? a.tau : ds.k_max;
  if (tau < 1 || tau > ds.k_max) {
    throw validation_error("tau must lie in {1,...,K}");
  }

  std::vector<EstimatorKind> kinds;
  if (a.estimator == "all") {
    kinds = {EstimatorKind::KM, EstimatorKind::IpwUnadjusted,
             EstimatorKind::IpwAdjusted, EstimatorKind::Aipw,
             EstimatorKind::Tmle};
  } else {
    kinds = {estimator_from_name(a.estimator)};
  }

  json estimates = json::object();
  for (EstimatorKind kind : kinds) {
    EstimatorConfig cfg;
    cfg.kind = kind;
    cfg.tau = tau;
    cfg.h_spec = a.h_spec;
    cfg.gr_spec = a.gr_spec;
    cfg.ga_spec = a.ga_spec;
    cfg.clamp.lo = a.clamp_lo;
    cfg.allow_unsaturated_gr = a.allow_unsaturated_gr;
    const EstimateResult res = run_estimator(ds, cfg);
    json jr = estimate_json(res);

    if (res.se.has_value()) {
      jr["wald_ci"] = inference_json(wald_ci(res.theta, *res.se, a.alpha));
    }
    if (a.boot > 0) {
      const BootstrapResult br =
          bootstrap(ds, cfg, res.theta, a.boot, a.seed, a.alpha, a.jobs);
      jr["bootstrap"] = {{"wald", inference_json(br.wald)},
                         {"percentile", inference_json(br.percentile)},
                         {"replicates_failed", br.n_failed}};
      if (!a.boot_dump.empty()) {
        std::ostringstream os;
        os << "replicate,theta\n";
        for (size_t r = 0; r < br.replicate_thetas.size(); ++r) {
          os << r << ',' << format_double(br.replicate_thetas[r]) << '\n';
        }
        write_text_file(a.boot_dump + "." + estimator_name(kind) + ".csv",
                        os.str());
      }
    }
    if (!a.dump_eif.empty() && !res.eif_values.empty()) {
      std::ostringstream os;
      os << "id,eif\n";
      for (int i = 0; i < ds.n(); ++i) {
        os << ds.records[i].id << ',' << format_double(res.eif_values[i])
           << '\n';
      }
      write_text_file(a.dump_eif + "." + estimator_name(kind) + ".csv",
                      os.str());
    }
    estimates[estimator_name(kind)] = std::move(jr);
  }

  if (!a.dump_long.empty()) {
    write_long_csv(ds, expand_long(ds), a.dump_long);
  }

  RunManifest manifest;
  manifest.command = command;
  manifest.input_digest = file_digest(a.input);
  manifest.seed = a.seed;
  manifest.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  json out;
  out["schema"] = kReportSchema;
  out["manifest"] = manifest_json(manifest);
  out["config"] = {{"tau", tau},
                   {"k", ds.k_max},
                   {"n", ds.n()},
                   {"estimator", a.estimator},
                   {"alpha", a.alpha},
                   {"boot", a.boot},
                   {"clamp_lo", a.clamp_lo},
                   {"h_spec", a.h_spec.empty() ? default_h_spec(ds.p()) : a.h_spec},
                   {"gr_spec", a.gr_spec.empty() ? default_gr_spec(ds.p()) : a.gr_spec},
                   {"ga_spec", a.ga_spec.empty() ? default_ga_spec(ds.p()) : a.ga_spec}};
  out["estimates"] = std::move(estimates);

  const std::string text = out.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return 0;
}

struct CurvesArgs {
  std::string input, out;
  int tau = 0, k = 0;
};

int cmd_curves(const CurvesArgs& a) {
  const Dataset ds = read_trial_csv(a.input, a.k);
  const int tau = a.tau > 0 ? a.tau : ds.k_max;
  if (tau < 1 || tau > ds.k_max) {
    throw validation_error("tau must lie in {1,...,K}");
  }
  const SurvivalCurve s1 = km_survival(ds, 1, tau);
  const SurvivalCurve s0 = km_survival(ds, 0, tau);
  const CensoringCurve g1 = km_censoring(ds, 1, tau);
  const CensoringCurve g0 = km_censoring(ds, 0, tau);
  std::ostringstream os;
  os << "t,S_treat,S_ctrl,G_treat,G_ctrl\n";
  for (int t = 0; t <= tau - 1; ++t) {
    os << t << ',' << format_double(s1.values[t]) << ','
       << format_double(s0.values[t]) << ',' << format_double(g1.values[t])
       << ',' << format_double(g0.values[t]) << '\n';
  }
  if (a.out.empty()) {
    std::cout << os.str();
  } else {
    write_text_file(a.out, os.str());
  }
  return 0;
}

struct SimArgs {
  std::string grid_file, out = "sim_report";
  int reps = 0, jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

StudyGrid parse_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open grid file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error(std::string("grid file is not valid JSON: ") +
                       e.what());
  }
  StudyGrid grid;
  const std::set<std::string> grid_keys = {"replicates", "master_seed",
                                           "oracle_mc", "cells"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!grid_keys.count(it.key())) {
      throw config_error("unknown grid key '" + it.key() + "'");
    }
  }
  grid.replicates = j.value("replicates", 1000);
  grid.master_seed = j.value("master_seed", 20240901ULL);
  grid.oracle_mc = j.value("oracle_mc", 2000000L);
  if (!j.contains("cells") || !j["cells"].is_array() || j["cells"].empty()) {
    throw config_error("grid file needs a non-empty 'cells' array");
  }
  const std::set<std::string> cell_keys = {
      "name", "n", "k", "tau", "scenario", "censoring", "effect",
      "effect_mean", "alpha0", "alpha1",
      "cens_intercept_noninf", "cens_intercept_inf", "cens_slope",
      "estimators", "h_spec", "gr_spec", "ga_spec"};
  int index = 0;
  for (const auto& cj : j["cells"]) {
    for (auto it = cj.begin(); it != cj.end(); ++it) {
      if (!cell_keys.count(it.key())) {
        throw config_error("unknown cell key '" + it.key() + "'");
      }
    }
    StudyCell cell;
    cell.name = cj.value("name", "cell" + std::to_string(index));
    cell.dgp.n = cj.value("n", 500);
    cell.dgp.k_max = cj.value("k", 180);
    cell.dgp.tau = cj.value("tau", cell.dgp.k_max);
    cell.dgp.scenario =
        scenario_from_name(cj.value("scenario", std::string("A")));
    cell.dgp.censoring = censoring_from_name(
        cj.value("censoring", std::string("non_informative")));
    cell.dgp.effect = cj.value("effect", std::string("zero")) == "positive"
                          ? EffectType::Positive
                          : EffectType::Zero;
    DgpConfig defaults;
    cell.dgp.effect_mean = cj.value("effect_mean", defaults.effect_mean);
    cell.dgp.alpha0 = cj.value("alpha0", defaults.alpha0);
    cell.dgp.alpha1 = cj.value("alpha1", defaults.alpha1);
    cell.dgp.cens_intercept_noninf =
        cj.value("cens_intercept_noninf", defaults.cens_intercept_noninf);
    cell.dgp.cens_intercept_inf =
        cj.value("cens_intercept_inf", defaults.cens_intercept_inf);
    cell.dgp.cens_slope = cj.value("cens_slope", defaults.cens_slope);
    cell.h_spec = cj.value("h_spec", std::string());
    cell.gr_spec = cj.value("gr_spec", std::string());
    cell.ga_spec = cj.value("ga_spec", std::string());
    if (cj.contains("estimators")) {
      for (const auto& e : cj["estimators"]) {
        cell.estimators.push_back(estimator_from_name(e.get<std::string>()));
      }
    } else {
      cell.estimators = {EstimatorKind::KM, EstimatorKind::IpwUnadjusted,
                         EstimatorKind::IpwAdjusted, EstimatorKind::Aipw,
                         EstimatorKind::Tmle};
    }
    grid.cells.push_back(std::move(cell));
    ++index;
  }
  return grid;
}

int cmd_simulate(const SimArgs& a) {
  StudyGrid grid = parse_grid(a.grid_file);
  if (a.reps > 0) grid.replicates = a.reps;
  if (a.seed_set) grid.master_seed = a.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const SimReport report = run_study(grid, resolve_jobs(a.jobs));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  // Reports are byte-stable across job counts: timing goes to stderr only.
  json j = sim_report_json(report);
  j["grid_digest"] = file_digest(a.grid_file);
  write_text_file(a.out + ".json", j.dump(2) + "\n");
  write_text_file(a.out + ".csv", sim_report_csv(report));
  std::cerr << "simulate: " << grid.cells.size() << " cells x "
            << grid.replicates << " replicates in " << secs << "s\n";
  return 0;
}

struct CalibrateArgs {
  long n_mc = 400000;
  std::uint64_t seed = 20240901;
  int k = 180;
  double mortality = 0.29;
  double theta = 14.9;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& a) {
  DgpConfig base;
  base.k_max = a.k;
  base.tau = a.k;
  CalibrationTargets targets;
  targets.control_mortality = a.mortality;
  targets.theta = a.theta;
  const CalibrationResult res = calibrate(base, targets, a.n_mc, a.seed);
  json j;
  j["horizon_k"] = a.k;
  j["targets"] = {{"control_mortality", a.mortality}, {"theta", a.theta}};
  j["alpha0"] = res.alpha0;
  j["alpha1"] = base.alpha1;
  j["mu"] = res.mu;
  j["achieved"] = {{"control_mortality", res.achieved_mortality},
                   {"theta", res.achieved_theta},
                   {"dropout_noninformative", res.dropout_noninformative},
                   {"dropout_informative", res.dropout_informative}};
  j["n_mc"] = a.n_mc;
  j["seed"] = a.seed;
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time RMST estimation and simulation"};
  app.set_version_flag("--version", rmst::kVersion);
  app.require_subcommand(1);

  EstimateArgs ea;
  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate the RMST difference from a trial CSV");
  est->add_option("--input", ea.input, "trial CSV")->required();
  est->add_option("--tau", ea.tau, "restriction time (default: K)");
  est->add_option("--k", ea.k, "override K (default: max observed time)");
  est->add_option("--estimator", ea.estimator,
                  "km|ipw|adj-ipw|aipw|tmle|all");
  est->add_option("--h-spec", ea.h_spec, "event hazard model terms");
  est->add_option("--gr-spec", ea.gr_spec, "censoring hazard model terms");
  est->add_option("--ga-spec", ea.ga_spec, "treatment model terms");
  est->add_option("--boot", ea.boot, "bootstrap replicates (0 = off)");
  est->add_option("--seed", ea.seed, "bootstrap seed");
  est->add_option("--alpha", ea.alpha, "CI level (default 0.05)");
  est->add_option("--jobs", ea.jobs, "bootstrap worker threads");
  est->add_option("--clamp", ea.clamp_lo, "probability clamp floor");
  est->add_option("--out", ea.out, "JSON report path (default: stdout)");
  est->add_option("--dump-long", ea.dump_long, "write long-form CSV here");
  est->add_option("--dump-eif", ea.dump_eif, "write per-subject EIF CSVs");
  est->add_option("--boot-dump", ea.boot_dump, "write replicate thetas CSVs");
  est->add_flag("--allow-unsaturated-gr", ea.allow_unsaturated_gr,
                "acknowledge a g_R spec without saturated(t,a)");

  CurvesArgs ca;
  CLI::App* cur = app.add_subcommand(
      "curves", "Export per-arm KM survival and censoring curves");
  cur->add_option("--input", ca.input, "trial CSV")->required();
  cur->add_option("--tau", ca.tau, "restriction time (default: K)");
  cur->add_option("--k", ca.k, "override K");
  cur->add_option("--out", ca.out, "curve CSV path (default: stdout)");

  SimArgs sa;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run a simulation study described by a JSON grid");
  sim->add_option("--grid", sa.grid_file, "grid JSON file")->required();
  sim->add_option("--reps", sa.reps, "replicates per cell (overrides grid)");
  sim->add_option("--seed", sa.seed, "master seed (overrides grid)")
      ->each([&sa](const std::string&) { sa.seed_set = true; });
  sim->add_option("--jobs", sa.jobs, "worker threads");
  sim->add_option("--out", sa.out, "output prefix (default: sim_report)");

  CalibrateArgs ka;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "Calibrate DGP constants to the target mortality/effect");
  cal->add_option("--n-mc", ka.n_mc, "Monte Carlo draws per evaluation");
  cal->add_option("--seed", ka.seed, "MC seed");
  cal->add_option("--k", ka.k, "horizon (K = tau)");
  cal->add_option("--mortality", ka.mortality, "control mortality target");
  cal->add_option("--theta", ka.theta, "oracle theta target");
  cal->add_option("--out", ka.out, "fixtures JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (est->parsed()) return cmd_estimate(ea, join_args(argc, argv));
    if (cur->parsed()) return cmd_curves(ca);
    if (sim->parsed()) return cmd_simulate(sa);
    if (cal->parsed()) return cmd_calibrate(ka);
  } catch (const rmst::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const rmst::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rmst::numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}

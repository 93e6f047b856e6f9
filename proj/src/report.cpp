#include "rmst/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmst/csv.hpp"
#include "rmst/errors.hpp"
#include "rmst/version.hpp"

namespace rmst {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::ostringstream os;
  os << in.rdbuf();
  return fnv1a_hex(os.str());
}

json manifest_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["version"] = m.version.empty() ? kVersion : m.version;
  j["schema"] = m.schema.empty() ? kReportSchema : m.schema;
  if (!m.input_digest.empty()) j["input_digest"] = m.input_digest;
  j["seed"] = m.seed;
  if (m.elapsed_seconds >= 0.0) j["elapsed_seconds"] = m.elapsed_seconds;
  return j;
}

json curve_json(const SurvivalCurve& c) {
  json j;
  j["arm"] = c.arm;
  j["source"] = curve_source_name(c.source);
  j["values"] = c.values;
  j["monotone"] = c.monotone;
  return j;
}

json estimate_json(const EstimateResult& r) {
  json j;
  j["estimator"] = estimator_name(r.kind);
  j["theta"] = r.theta;
  j["rmst"] = {{"arm1", r.rmst1}, {"arm0", r.rmst0}};
  j["curves"] = {curve_json(r.curve1), curve_json(r.curve0)};
  if (r.se.has_value()) {
    j["se"] = *r.se;
  } else {
    j["se"] = nullptr;
    j["se_reason"] = r.se_reason.empty() ? "not available" : r.se_reason;
  }
  if (r.se.has_value() && !r.se_reason.empty()) j["se_caveat"] = r.se_reason;
  j["positivity_warning"] = r.positivity_warning;
  j["ridge_used"] = r.ridge_used;
  j["converged"] = r.converged;
  if (r.iterations > 0) j["iterations"] = r.iterations;
  if (r.kind == EstimatorKind::Tmle) j["mean_eif"] = r.mean_eif;
  return j;
}

json inference_json(const InferenceResult& r) {
  json j;
  j["point"] = r.point;
  j["se"] = r.se;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["method"] = ci_method_name(r.method);
  j["alpha"] = r.alpha;
  if (r.replicates > 0) j["replicates"] = r.replicates;
  return j;
}

namespace {

json cell_json(const CellReport& cr) {
  json j;
  j["name"] = cr.cell.name;
  j["dgp"] = {{"n", cr.cell.dgp.n},
              {"k", cr.cell.dgp.k_max},
              {"tau", cr.cell.dgp.tau},
              {"scenario", scenario_name(cr.cell.dgp.scenario)},
              {"censoring", censoring_name(cr.cell.dgp.censoring)},
              {"effect", cr.cell.dgp.effect == EffectType::Zero ? "zero"
                                                                : "positive"},
              {"effect_mean", cr.cell.dgp.effect_mean},
              {"alpha0", cr.cell.dgp.alpha0}};
  if (!cr.cell.h_spec.empty()) j["h_spec"] = cr.cell.h_spec;
  if (!cr.cell.gr_spec.empty()) j["gr_spec"] = cr.cell.gr_spec;
  j["oracle_theta"] = cr.oracle;
  j["failure_flag"] = cr.failure_flag;
  json stats = json::array();
  for (const auto& st : cr.stats) {
    stats.push_back({{"estimator", estimator_name(st.kind)},
                     {"bias", st.bias},
                     {"variance", st.variance},
                     {"mse", st.mse},
                     {"rmse", st.rmse},
                     {"mc_se_bias", st.mc_se_bias},
                     {"replicates_ok", st.n_ok},
                     {"replicates_failed", st.n_failed}});
  }
  j["estimators"] = std::move(stats);
  return j;
}

}  // namespace

json sim_report_json(const SimReport& rep) {
  json j;
  j["schema"] = kReportSchema;
  j["replicates"] = rep.grid.replicates;
  j["master_seed"] = rep.grid.master_seed;
  j["oracle_mc"] = rep.grid.oracle_mc;
  json cells = json::array();
  for (const auto& cr : rep.cells) cells.push_back(cell_json(cr));
  j["cells"] = std::move(cells);
  return j;
}

std::string sim_report_csv(const SimReport& rep) {
  std::ostringstream os;
  os << "cell,scenario,censoring,effect,n,tau,estimator,oracle_theta,bias,"
        "variance,mse,rmse,mc_se_bias,replicates_ok,replicates_failed\n";
  for (const auto& cr : rep.cells) {
    for (const auto& st : cr.stats) {
      os << cr.cell.name << ',' << scenario_name(cr.cell.dgp.scenario) << ','
         << censoring_name(cr.cell.dgp.censoring) << ','
         << (cr.cell.dgp.effect == EffectType::Zero ? "zero" : "positive")
         << ',' << cr.cell.dgp.n << ',' << cr.cell.dgp.tau << ','
         << estimator_name(st.kind) << ',' << format_double(cr.oracle) << ','
         << format_double(st.bias) << ',' << format_double(st.variance) << ','
         << format_double(st.mse) << ',' << format_double(st.rmse) << ','
         << format_double(st.mc_se_bias) << ',' << st.n_ok << ','
         << st.n_failed << '\n';
    }
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write file: " + path);
  out << content;
}

}  // namespace rmst

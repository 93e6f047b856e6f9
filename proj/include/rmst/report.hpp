#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmst/estimators.hpp"
#include "rmst/inference.hpp"
#include "rmst/study.hpp"

namespace rmst {

// Provenance block embedded in every report. Timing is only included where
// byte-stable output is not required (estimate reports); the simulate
// report omits it so identical seeds give identical bytes.
struct RunManifest {
  std::string command;
  std::string version;
  std::string schema;
  std::string input_digest;  // fnv1a-64 of the input file, hex
  std::uint64_t seed = 0;
  double elapsed_seconds = -1.0;  // < 0: omit
};

nlohmann::json manifest_json(const RunManifest& m);

std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::string& path);

nlohmann::json curve_json(const SurvivalCurve& c);
nlohmann::json estimate_json(const EstimateResult& r);
nlohmann::json inference_json(const InferenceResult& r);
nlohmann::json sim_report_json(const SimReport& rep);

// One row per cell x estimator.
std::string sim_report_csv(const SimReport& rep);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rmst

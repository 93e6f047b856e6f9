#pragma once

#include <string>
#include <vector>

namespace rmst {

// One participant in the short form: baseline covariates, study arm,
// event indicator and the follow-up time min(C, T) on the discrete scale.
// Events occur at times 1..K; censoring at times 0..K, where time K with
// event == 0 encodes administrative censoring.
struct SubjectRecord {
  std::string id;
  std::vector<double> w;
  int arm = 0;    // A in {0,1}
  int event = 0;  // Delta in {0,1}
  int time = 0;   // min(C,T) in {0,...,K}
};

struct Dataset {
  std::vector<SubjectRecord> records;
  int k_max = 0;
  std::vector<std::string> covariate_names;

  int n() const { return static_cast<int>(records.size()); }
  int p() const { return static_cast<int>(covariate_names.size()); }
  int arm_count(int a) const;
};

struct ValidationIssue {
  std::string record_id;  // empty for dataset-level issues
  std::string message;
};

// Validates the raw records against the short-form invariants. On success
// `out` is filled and the returned list is empty; otherwise the list holds
// one diagnostic per problem and `out` is untouched.
std::vector<ValidationIssue> validate_dataset(
    std::vector<SubjectRecord> records, int k_max,
    std::vector<std::string> covariate_names, Dataset* out);

// Convenience wrapper that throws validation_error with joined diagnostics.
Dataset make_dataset(std::vector<SubjectRecord> records, int k_max,
                     std::vector<std::string> covariate_names);

}  // namespace rmst

#include "rmst/data.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "rmst/errors.hpp"

namespace rmst {

int Dataset::arm_count(int a) const {
  int c = 0;
  for (const auto& r : records) c += (r.arm == a);
  return c;
}

std::vector<ValidationIssue> validate_dataset(
    std::vector<SubjectRecord> records, int k_max,
    std::vector<std::string> covariate_names, Dataset* out) {
  std::vector<ValidationIssue> issues;
  const int p = static_cast<int>(covariate_names.size());

  if (k_max < 1) {
    issues.push_back({"", "K must be at least 1"});
  }

  std::set<std::string> seen;
  int n_arm[2] = {0, 0};
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      issues.push_back({r.id, "duplicate id"});
    }
    if (r.arm != 0 && r.arm != 1) {
      issues.push_back({r.id, "arm must be 0 or 1"});
    } else {
      ++n_arm[r.arm];
    }
    if (r.event != 0 && r.event != 1) {
      issues.push_back({r.id, "event must be 0 or 1"});
    }
    if (r.time < 0 || r.time > k_max) {
      std::ostringstream os;
      os << "time " << r.time << " outside {0,...," << k_max << "}";
      issues.push_back({r.id, os.str()});
    } else if (r.event == 1 && r.time < 1) {
      issues.push_back({r.id, "event time must be >= 1"});
    }
    if (static_cast<int>(r.w.size()) != p) {
      std::ostringstream os;
      os << "expected " << p << " covariates, got " << r.w.size();
      issues.push_back({r.id, os.str()});
    } else {
      for (double v : r.w) {
        if (!std::isfinite(v)) {
          issues.push_back({r.id, "covariate value not finite"});
          break;
        }
      }
    }
  }
  if (n_arm[0] == 0 || n_arm[1] == 0) {
    issues.push_back({"", "both arms must be present"});
  }

  if (issues.empty() && out != nullptr) {
    out->records = std::move(records);
    out->k_max = k_max;
    out->covariate_names = std::move(covariate_names);
  }
  return issues;
}

Dataset make_dataset(std::vector<SubjectRecord> records, int k_max,
                     std::vector<std::string> covariate_names) {
  Dataset ds;
  auto issues = validate_dataset(std::move(records), k_max,
                                 std::move(covariate_names), &ds);
  if (!issues.empty()) {
    std::ostringstream os;
    os << "invalid dataset:";
    for (const auto& is : issues) {
      os << "\n  " << (is.record_id.empty() ? "<dataset>" : is.record_id)
         << ": " << is.message;
    }
    throw validation_error(os.str());
  }
  return ds;
}

}  // namespace rmst

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmst/data.hpp"
#include "rmst/model_spec.hpp"

namespace rmst {

// One fitting unit for a working model: the (time, arm, covariates) feature
// source plus the binary response. `time` is the hazard's own index
// (1..K for events, 0..K-1 for censoring, ignored for treatment).
struct ModelRow {
  int subject = 0;
  int time = 0;
  int arm = 0;
  double response = 0.0;
};

// Column layout of an expanded spec; time factors expand to one indicator
// per level in ascending time, everything else to a single column.
struct DesignLayout {
  std::vector<int> term_start;
  int cols = 0;
  int tf_first = 0;
  int tf_count = 0;
};

DesignLayout make_design_layout(const ModelSpec& spec, int k_max);

// Sparse-row design matrix. Saturated time factors make dense storage
// quadratic in K; rows here never hold more than a handful of entries.
struct DesignMatrix {
  int cols = 0;
  std::vector<std::string> col_names;
  std::vector<int> row_ptr;  // size rows+1
  std::vector<int> col_idx;
  std::vector<double> values;

  int rows() const { return static_cast<int>(row_ptr.size()) - 1; }

  double row_dot(int r, std::span<const double> beta) const {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      s += values[k] * beta[col_idx[k]];
    }
    return s;
  }
};

// Expands spec terms into columns for the given rows.
DesignMatrix build_design(const ModelSpec& spec, const Dataset& ds,
                          std::span<const ModelRow> rows);

// Feature vector of a single hypothetical cell (time, arm, subject's w),
// appended as (col, value) pairs; used to evaluate a fit on the full grid.
void cell_features(const ModelSpec& spec, const DesignLayout& lay,
                   const Dataset& ds, int subject, int time, int arm,
                   std::vector<std::pair<int, double>>* out);

}  // namespace rmst

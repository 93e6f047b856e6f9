#include "rmst/design.hpp"

#include <sstream>

#include "rmst/errors.hpp"

namespace rmst {

DesignLayout make_design_layout(const ModelSpec& spec, int k_max) {
  DesignLayout lay;
  lay.tf_first = time_factor_first(spec.role);
  lay.tf_count = k_max;  // levels tf_first .. tf_first + k_max - 1
  for (const auto& t : spec.terms) {
    lay.term_start.push_back(lay.cols);
    switch (t.kind) {
      case TermKind::TimeFactor:
      case TermKind::ArmTimeFactor:
        lay.cols += lay.tf_count;
        break;
      default:
        lay.cols += 1;
        break;
    }
  }
  return lay;
}

DesignMatrix build_design(const ModelSpec& spec, const Dataset& ds,
                          std::span<const ModelRow> rows) {
  const DesignLayout lay = make_design_layout(spec, ds.k_max);

  DesignMatrix X;
  X.cols = lay.cols;
  X.col_names.reserve(lay.cols);
  for (const auto& t : spec.terms) {
    switch (t.kind) {
      case TermKind::Intercept:
        X.col_names.push_back("(Intercept)");
        break;
      case TermKind::Arm:
        X.col_names.push_back("a");
        break;
      case TermKind::TimeLinear:
        X.col_names.push_back("t");
        break;
      case TermKind::ArmTimeLinear:
        X.col_names.push_back("a:t");
        break;
      case TermKind::TimeFactor:
        for (int l = 0; l < lay.tf_count; ++l) {
          X.col_names.push_back("t=" + std::to_string(lay.tf_first + l));
        }
        break;
      case TermKind::ArmTimeFactor:
        for (int l = 0; l < lay.tf_count; ++l) {
          X.col_names.push_back("a:t=" + std::to_string(lay.tf_first + l));
        }
        break;
      case TermKind::Covariate:
        X.col_names.push_back(ds.covariate_names[t.covariate]);
        break;
      case TermKind::ArmCovariate:
        X.col_names.push_back("a:" + ds.covariate_names[t.covariate]);
        break;
    }
  }

  X.row_ptr.reserve(rows.size() + 1);
  X.row_ptr.push_back(0);
  std::vector<std::pair<int, double>> feats;
  for (const auto& row : rows) {
    feats.clear();
    cell_features(spec, lay, ds, row.subject, row.time, row.arm, &feats);
    for (auto [c, v] : feats) {
      X.col_idx.push_back(c);
      X.values.push_back(v);
    }
    X.row_ptr.push_back(static_cast<int>(X.col_idx.size()));
  }
  return X;
}

void cell_features(const ModelSpec& spec, const DesignLayout& lay,
                   const Dataset& ds, int subject, int time, int arm,
                   std::vector<std::pair<int, double>>* out) {
  const std::vector<double>& w = ds.records[subject].w;
  for (size_t ti = 0; ti < spec.terms.size(); ++ti) {
    const Term& t = spec.terms[ti];
    const int base = lay.term_start[ti];
    switch (t.kind) {
      case TermKind::Intercept:
        out->emplace_back(base, 1.0);
        break;
      case TermKind::Arm:
        if (arm != 0) out->emplace_back(base, 1.0);
        break;
      case TermKind::TimeLinear:
        if (time != 0) out->emplace_back(base, static_cast<double>(time));
        break;
      case TermKind::ArmTimeLinear:
        if (arm != 0 && time != 0) {
          out->emplace_back(base, static_cast<double>(time));
        }
        break;
      case TermKind::TimeFactor: {
        const int l = time - lay.tf_first;
        if (l >= 0 && l < lay.tf_count) out->emplace_back(base + l, 1.0);
        break;
      }
      case TermKind::ArmTimeFactor: {
        const int l = time - lay.tf_first;
        if (arm != 0 && l >= 0 && l < lay.tf_count) {
          out->emplace_back(base + l, 1.0);
        }
        break;
      }
      case TermKind::Covariate: {
        const double v = w[t.covariate];
        if (v != 0.0) out->emplace_back(base, v);
        break;
      }
      case TermKind::ArmCovariate: {
        const double v = arm != 0 ? w[t.covariate] : 0.0;
        if (v != 0.0) out->emplace_back(base, v);
        break;
      }
    }
  }
}

}  // namespace rmst

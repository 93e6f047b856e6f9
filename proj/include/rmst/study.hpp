#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rmst/dgp.hpp"
#include "rmst/estimators.hpp"

namespace rmst {

// One simulation cell: a data-generating configuration evaluated by a set
// of estimators, with optional working-model overrides (e.g. a deliberately
// misspecified hazard model).
struct StudyCell {
  std::string name;
  DgpConfig dgp;
  std::vector<EstimatorKind> estimators;
  std::string h_spec;   // empty -> default for p = 5
  std::string gr_spec;  // default: saturated(t,a) + w1 + w5 + a:w3
  std::string ga_spec;  // default: 1 + w1..w5
};

struct StudyGrid {
  std::vector<StudyCell> cells;
  int replicates = 1000;
  std::uint64_t master_seed = 20240901;
  long oracle_mc = 2'000'000;
};

struct EstimatorStats {
  EstimatorKind kind = EstimatorKind::KM;
  double bias = 0.0;
  double variance = 0.0;  // population variance across replicates
  double mse = 0.0;       // equals bias^2 + variance exactly
  double rmse = 0.0;      // MSE(KM) / MSE(this); 0 when KM absent
  double mc_se_bias = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct CellReport {
  StudyCell cell;
  double oracle = 0.0;
  std::vector<EstimatorStats> stats;
  bool failure_flag = false;  // some estimator failed in > 1% of replicates
};

struct SimReport {
  StudyGrid grid;
  std::vector<CellReport> cells;
};

// The working models the simulation study runs with when no override is
// given: the censoring model carries the saturated block plus the terms
// the informative mechanism actually uses.
std::string study_default_gr_spec();

// Runs replicates across cells on `jobs` threads; replicate r of cell c
// uses the derived stream (master_seed, c, r), and the per-cell oracle is
// Monte Carlo with stream (master_seed, c). Deterministic in the seed
// regardless of thread count.
SimReport run_study(const StudyGrid& grid, int jobs);

// Replicate-level estimates for one cell (exposed for coverage studies).
struct CellReplicates {
  std::vector<std::vector<double>> theta;  // [estimator][replicate], NaN=fail
};
CellReplicates run_cell(const StudyCell& cell, int replicates,
                        std::uint64_t master_seed, std::uint64_t cell_index,
                        int jobs);

}  // namespace rmst

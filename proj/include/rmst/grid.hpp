#pragma once

#include <vector>

namespace rmst {

// Dense subject x arm x time grid of probabilities or survivor values.
// Time slots carry natural indices; callers document the valid range.
struct Grid3 {
  int n = 0;
  int times = 0;
  std::vector<double> v;

  Grid3() = default;
  Grid3(int n_, int times_, double fill = 0.0)
      : n(n_), times(times_),
        v(static_cast<size_t>(n_) * 2 * times_, fill) {}

  double& at(int subject, int arm, int t) {
    return v[(static_cast<size_t>(subject) * 2 + arm) * times + t];
  }
  double at(int subject, int arm, int t) const {
    return v[(static_cast<size_t>(subject) * 2 + arm) * times + t];
  }
};

}  // namespace rmst

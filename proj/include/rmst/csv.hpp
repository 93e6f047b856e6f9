#pragma once

#include <string>
#include <vector>

#include "rmst/data.hpp"
#include "rmst/long_form.hpp"

namespace rmst {

// Short-form trial CSV: header `id,arm,time,event[,covariate...]`, one row
// per subject. K is inferred as max(time) unless k_override > 0. Parse or
// validation problems raise validation_error with per-record diagnostics.
Dataset read_trial_csv(const std::string& path, int k_override = 0);

void write_trial_csv(const Dataset& ds, const std::string& path);

// Long-form export for debugging: id, m, a, w..., J, R, I_next, L_next.
void write_long_csv(const Dataset& ds, const std::vector<LongRow>& rows,
                    const std::string& path);

// Low-level helpers shared by the report writers.
std::vector<std::vector<std::string>> read_csv_table(const std::string& path);
std::string format_double(double v);  // shortest round-trip representation

}  // namespace rmst

#pragma once

namespace rmst {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "rmst-report/1";

}  // namespace rmst

#pragma once

#include <string>
#include <vector>

#include "rmst/data.hpp"

namespace rmst {

enum class ResponseRole { EventHazard, CensoringHazard, Treatment };

enum class TermKind {
  Intercept,      // 1
  Arm,            // a
  TimeLinear,     // t
  ArmTimeLinear,  // a:t
  TimeFactor,     // ft (one indicator column per time point)
  ArmTimeFactor,  // a:ft
  Covariate,      // w<j> or a covariate name
  ArmCovariate,   // a:w<j>
};

struct Term {
  TermKind kind;
  int covariate = -1;  // 0-based, for Covariate / ArmCovariate
};

// Parsed model formula. The grammar is `+`-separated tokens:
//   1, a, t, a:t, ft, a:ft, w<j>, a:w<j>, saturated(t,a), or a covariate
//   name (optionally a:<name>). saturated(t,a) expands to 1 + ft + a + a:ft.
struct ModelSpec {
  std::vector<Term> terms;
  ResponseRole role = ResponseRole::EventHazard;
  std::string source;

  bool has(TermKind k) const;
  // True when the spec contains the full saturated(t,a) block.
  bool has_saturated_time_arm() const;
};

ModelSpec parse_model_spec(const std::string& text, ResponseRole role,
                           const std::vector<std::string>& covariate_names);

// Time-factor levels by role: events are indexed 1..K, censoring 0..K-1.
inline int time_factor_first(ResponseRole role) {
  return role == ResponseRole::EventHazard ? 1 : 0;
}

std::string default_h_spec(int p);   // 1 + t + a + a:t + w1 + ... + wp
std::string default_gr_spec(int p);  // saturated(t,a)
std::string default_ga_spec(int p);  // 1 + w1 + ... + wp

}  // namespace rmst

#pragma once

#include <stdexcept>
#include <string>

namespace rmst {

// Input data failed validation (bad records, impossible times, ...).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration could not be parsed (model grammar, study grid, ...).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An estimator hit a numerical dead end (degenerate weights, fitter failure).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rmst

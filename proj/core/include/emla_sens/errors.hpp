#pragma once

#include <stdexcept>
#include <string>

namespace emla {

/// Raised when a configuration or model input fails a structural check.
/// The message names the offending field so the caller can fix the input.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical run leaves its domain of validity: tracking error
/// beyond the abort threshold, a transmission driven through a singular
/// configuration, or a finite-difference step too small for double precision.
class DivergenceError : public std::runtime_error {
public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace emla

#pragma once

#include <stdexcept>
#include <string>

namespace cadeval {

/// Malformed or inconsistent input data. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid input that cannot support the requested computation,
/// e.g. a single-class ROC sample, a dataset without lesions, or an
/// all-background image.
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// Invalid configuration value (thresholds out of range, non-monotone
/// calibration, bad bootstrap settings).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace cadeval

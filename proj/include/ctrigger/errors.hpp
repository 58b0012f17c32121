#pragma once

#include <stdexcept>

namespace ctrigger {

/// Malformed input or configuration. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system failures: missing files, short reads, unwritable outputs.
/// The CLI maps this to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An indicator has no meaningful value for the given percentiles (for
/// example a zero mean or a zero P denominator).
class IndicatorUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ctrigger

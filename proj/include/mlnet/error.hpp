#pragma once

#include <stdexcept>
#include <string>

namespace mlnet {

/// Malformed configuration, schema, expression or command-line usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be used (missing columns, bad files, mismatched vertex counts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant failed at runtime.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mlnet

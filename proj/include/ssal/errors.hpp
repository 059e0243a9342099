#pragma once

#include <stdexcept>
#include <string>

namespace ssal {

/// Malformed or inconsistent input data (bad coordinates, dimension mismatch, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (non-positive radius, non-PD correlation, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called on state that does not satisfy its precondition.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside an inference engine (NaN objective, ...).
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssal

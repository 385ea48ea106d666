#pragma once

#include <stdexcept>
#include <string>

namespace dst {

/// Malformed or inconsistent input data (schema, corpus, traces, lexicons).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad run configuration: missing files, unset credentials, invalid settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chat backend could not produce a response.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dst

#pragma once

#include <stdexcept>
#include <string>

namespace semilin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input (configuration, parameter ranges).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Iteration failed to converge or left its trust region.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace semilin

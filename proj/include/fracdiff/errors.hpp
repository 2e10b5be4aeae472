#pragma once

#include <stdexcept>
#include <string>

namespace fracdiff {

// Parameters outside the admissible model family.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller supplied inputs that the operation cannot work with
// (missing diagnostics, too few samples, ...).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Iterations that failed to converge, factorizations that broke down,
// step sizes outside a stability limit.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fracdiff

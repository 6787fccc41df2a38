#pragma once

#include <stdexcept>
#include <string>

namespace esrsim {

// Error taxonomy mirrors the CLI exit codes: config 2, numeric 3, fit 4.
// Domain-precondition violations in the scalar relations throw
// std::domain_error and are mapped to numeric failures at the C boundary.

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace esrsim

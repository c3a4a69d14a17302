#pragma once

#include <stdexcept>
#include <string>

namespace segsamp {

// Bad inputs: out-of-range parameters, mismatched grids, malformed files.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Divergence, singular systems, non-finite results.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Requested acceleration cannot be met by any density of the requested shape.
class InfeasibleDensity : public ValidationError {
public:
  InfeasibleDensity(const std::string& what, double achievable_R)
      : ValidationError(what), achievable_R_(achievable_R) {}
  double achievable_R() const { return achievable_R_; }

private:
  double achievable_R_;
};

} // namespace segsamp

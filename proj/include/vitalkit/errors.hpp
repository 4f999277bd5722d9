#pragma once

#include <stdexcept>
#include <string>

namespace vitalkit {

// Bad input: parameter out of domain, malformed file, unsupported variant.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to reach its accuracy target.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class ConvergenceError : public NumericalError {
 public:
  explicit ConvergenceError(const std::string& what) : NumericalError(what) {}
};

// The requested model has no closed-form route; the caller should fall back to
// Monte Carlo or Laplace inversion.
class NoClosedFormError : public std::logic_error {
 public:
  explicit NoClosedFormError(const std::string& what) : std::logic_error(what) {}
};

// No death-time density is available for the model structure (e.g. jumps
// together with diffusion); use a Monte Carlo estimate instead.
class NoDensityRoute : public NoClosedFormError {
 public:
  explicit NoDensityRoute(const std::string& what) : NoClosedFormError(what) {}
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace vitalkit

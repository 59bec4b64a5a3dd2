#pragma once

#include <stdexcept>
#include <string>

namespace meshgen {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A reference or surface parameter outside [0,1], or a non-positive count.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An object whose construction arguments violate its invariants
/// (duplicate knots, mismatched axes, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A block whose boundary surfaces do not fit together.
class SpecError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

} // namespace meshgen

#pragma once

#include <stdexcept>
#include <string>

namespace epdiff {

// Base of every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid too coarse for the requested bandwidth.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Input violates a structural requirement, e.g. conjugate symmetry.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A symbol vanishes where it must be inverted.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// The asymptotic expansion of a symbol could not be extracted.
class ExpansionError : public Error {
 public:
  using Error::Error;
};

// A sum over the lattice does not converge for the requested order.
class DivergentSumError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its stated preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf appeared during time stepping.
class NumericalOverflowError : public Error {
 public:
  using Error::Error;
};

// The flow map stopped being an orientation-preserving diffeomorphism.
class DiffeomorphismLossError : public Error {
 public:
  using Error::Error;
};

// Trajectory does not have enough snapshots for the requested analysis.
class CadenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace epdiff

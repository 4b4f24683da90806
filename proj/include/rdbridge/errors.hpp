#pragma once

#include <stdexcept>
#include <string>

namespace rdbridge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input (dimension mismatch, mass not conserved,
// infeasible reference measure, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A certificate was requested from a Schrodinger solve whose marginal residual
// is too large to trust.
class StaleCertificate : public Error {
 public:
  using Error::Error;
};

class EmptyComparison : public Error {
 public:
  using Error::Error;
};

// Iteration budget exhausted. Solvers derive from this and attach their
// partial state.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace rdbridge

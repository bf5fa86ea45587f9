#pragma once

#include <stdexcept>
#include <string>

namespace fluxspin {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The fluctuator's transition graph is not strongly connected.
class NonErgodic : public Error {
 public:
  using Error::Error;
};

// All transition rates vanish on a chain with more than one state.
class ZeroRates : public Error {
 public:
  using Error::Error;
};

class NotSupported : public Error {
 public:
  using Error::Error;
};

// Ill-conditioned eigendecomposition, or disagreement between solver routes.
class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
};

}  // namespace fluxspin

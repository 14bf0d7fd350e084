#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad dimensions, invalid algebra, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Flag (Y, U) does not span a plane, or Y = 0 where a direction is required.
class DegenerateFlagError : public Error {
 public:
  using Error::Error;
};

// A formula was asked to run outside the hypotheses it is valid under.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Configuration outside an oracle's scope (e.g. Koszul tables with h != 0).
class UnsupportedError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

}  // namespace finsler

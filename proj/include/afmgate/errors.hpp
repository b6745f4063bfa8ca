#pragma once

#include <stdexcept>
#include <string>

namespace afmgate {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested Hilbert space or problem size exceeds the supported range.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An operation was called with an object of the wrong kind
/// (e.g. an unconstrained basis handed to the PXP builder).
class MisuseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Second-order level shift evaluated at a resonance (Delta ~ B or 2B).
class SingularShiftError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// NaN/overflow or failed post-condition inside a numerical kernel.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitQualityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form error model evaluated outside its regime of validity.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afmgate

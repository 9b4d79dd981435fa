#pragma once

#include <stdexcept>
#include <string>

namespace ocrd {

/// Malformed input: bad shapes, negative masses, unknown config fields.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Well-formed input outside an operation's mathematical domain
/// (e.g. a crossover probability above 1/2, an infeasible Gaussian spec).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An enumeration or allocation would exceed a configured size cap.
class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace ocrd

#pragma once

#include <stdexcept>
#include <string>

namespace cbm {

/// An argument lies outside the domain of a formula (non-finite input,
/// probability outside [0,1], correlation at a forbidden endpoint, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulation or experiment was configured inconsistently.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computed quantity violated an invariant it must satisfy by
/// construction (e.g. a survival series summing outside [0,1]).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbm

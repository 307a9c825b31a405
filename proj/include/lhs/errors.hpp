#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lhs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (vector lengths, matrix orders, particle counts).
struct DimensionError : Error {
  using Error::Error;
};

// A documented precondition on values does not hold.
struct DomainError : Error {
  using Error::Error;
};

// A theorem's sufficient condition fails, so no rate can be issued.
struct HypothesisViolated : DomainError {
  using DomainError::DomainError;
};

// Four points too close to a coincidence for the cross-ratio denominators.
struct DegeneratePosition : DomainError {
  using DomainError::DomainError;
};

struct IntegrationError : Error {
  IntegrationError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  std::size_t step_index;
};

struct DriftAbort : IntegrationError {
  using IntegrationError::IntegrationError;
};

struct ConfigError : Error {
  ConfigError(const std::string& what, std::string key_name = {}, std::size_t line_no = 0)
      : Error(what), key(std::move(key_name)), line(line_no) {}
  std::string key;
  std::size_t line;
};

}  // namespace lhs

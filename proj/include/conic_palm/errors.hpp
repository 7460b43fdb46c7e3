#pragma once

#include <stdexcept>
#include <string>

namespace conic_palm {

/// Bad arguments: dimension mismatch, non-positive penalty, negative tolerance.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An eigendecomposition or linear solve did not converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown registry name.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A registered benchmark failed validation of its reference solution.
class RegistryIntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed problem document. what() carries a JSON-pointer-like location.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& location, const std::string& message)
      : std::runtime_error(location + ": " + message), location_(location) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace conic_palm

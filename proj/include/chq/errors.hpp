#pragma once

#include <stdexcept>
#include <string>

namespace chq {

// Base for every error the engine raises. Callers that only need a message
// can catch this; the CLI maps the concrete types onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix or container dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input outside the domain of an operation (non-Hermitian Hamiltonian,
/// non-unit axis, invalid decomposition, non-partition grouping, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (e.g. the eigensolver did not converge).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A history label or named element does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for the structure of the input
/// (e.g. branch-dependent families where a product family is required).
class UnsupportedStructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace chq

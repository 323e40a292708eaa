#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radau_dae {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// An inner iteration (root polish, Lambert W, ...) did not reach its tolerance.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The predictor Newton iteration failed on a cell.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::size_t cell)
      : Error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// A block elimination was requested but its pivot blocks are non-square or singular.
class ReductionInapplicable : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ReferenceAccuracyFailure : public Error {
 public:
  using Error::Error;
};

class UnknownProblem : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace radau_dae

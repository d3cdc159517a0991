#pragma once

#include <stdexcept>
#include <string>

namespace projnod {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: asymmetric adjacency, bad JSON, dimension mismatch.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input is well formed but outside the operation's domain
/// (n < 2, rank-deficient basis, disconnected graph where one is required).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Reduced-model operations only support rank-one constraints.
class UnsupportedRankError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Selected eigenvalue is (numerically) repeated.
class NonSimpleEigenvalueError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Iterative solver failure or loss of finiteness.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, double time) : NumericError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace projnod

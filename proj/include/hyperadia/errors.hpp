#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyperadia {

// Base of every error raised by the library. Callers that only want to know
// "did the numerics fail" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A series or iteration did not settle within its term budget.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A hypergeometric function vanished at the matching point, so its logarithmic
// derivative is undefined there.
class ZeroCrossingError : public Error {
 public:
  using Error::Error;
};

// Eigenvalue scan found no usable sign change. The trace holds (nu1, residual)
// pairs in scan order; non-finite residuals mark points that raised errors.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, std::vector<std::pair<double, double>> trace)
      : Error(what), scan_trace(std::move(trace)) {}
  std::vector<std::pair<double, double>> scan_trace;
};

// The channel belongs to the other asymptotic class (l1 == 0 vs l1 != 0).
class WrongClassError : public Error {
 public:
  using Error::Error;
};

// A numerical kernel (eigensolver, integrator, phase extraction) failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperadia

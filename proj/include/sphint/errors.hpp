#pragma once

#include <stdexcept>
#include <string>

namespace sphint {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested value exists only outside the supported branch or range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Evaluation point coincides with a singularity (an atom of the measure).
class SingularError : public Error {
 public:
  using Error::Error;
};

// Mismatched or insufficient dimensions / counts.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Matrix expected to be positive definite is not.
class NotPDError : public Error {
 public:
  using Error::Error;
};

// An exact algebraic identity failed beyond tolerance.
class IdentityError : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature failed to meet its error target.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// Eigenvalues too close for a determinantal ratio to be evaluated.
class DegenerateEigsError : public Error {
 public:
  using Error::Error;
};

// Computation exceeds the floating-point budget of the chosen algorithm.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Colliding or invalid random-stream seeds.
class SeedError : public Error {
 public:
  using Error::Error;
};

}  // namespace sphint

#pragma once

#include <stdexcept>
#include <string>

namespace nbqi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index or support reaches outside the stored knot window.
class WindowBoundsError : public Error {
 public:
  using Error::Error;
};

/// The operation needs a larger spline degree (e.g. M-splines need m >= 2).
class UnsupportedDegreeError : public Error {
 public:
  using Error::Error;
};

class DegenerateNodesError : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside its documented domain (p < m, h <= 0, r < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Supplied functional weights violate the exactness constraints.
class InconsistentCoefficientsError : public Error {
 public:
  using Error::Error;
};

class MissingDerivativeError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient L1 problem or a vanishing determinant in a closed form.
class DegenerateProblemError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point outside the range where an expansion is complete.
class RangeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (knot files, configs, problem dumps).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbqi

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace otg {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that cannot be combined (matrix sizes, measure sizes, histogram bin
// counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Structurally well-formed input whose values break a required invariant
// (negative weights, non-finite costs, degenerate inputs).
class ValueError : public Error {
 public:
  using Error::Error;
};

// A per-point attribute required by an operation is absent.
class AttributeError : public Error {
 public:
  using Error::Error;
};

// An iterative method failed to reach its termination criterion.
class SolverError : public Error {
 public:
  using Error::Error;
};

// File and stream failures, including malformed on-disk formats.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace otg

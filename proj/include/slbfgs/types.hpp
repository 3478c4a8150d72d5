#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace slbfgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes are incompatible.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A triangular factor has a diagonal entry below the singularity tolerance.
struct SingularTriangular : Error {
  using Error::Error;
};

/// A (quasi-Newton) middle system is numerically singular; the caller should
/// drop the oldest stored pair and retry.
struct SingularMiddleMatrix : Error {
  using Error::Error;
};

/// A candidate pair violates the curvature condition s^T u > tol.
struct CurvatureReject : Error {
  using Error::Error;
};

/// A full-memory update was attempted with non-positive curvature.
struct CurvatureViolation : Error {
  using Error::Error;
};

/// s^T (A + K) s vanished in a full-memory structured update.
struct DegenerateCurvature : Error {
  using Error::Error;
};

/// An initialization operator that must be positive definite is not.
struct InitNotPD : Error {
  using Error::Error;
};

/// The regularization search exhausted its cap without reaching positive
/// definiteness.
struct RegularizationFailed : Error {
  using Error::Error;
};

/// A data file does not conform to its documented format. The message names
/// the offending line.
struct ParseError : Error {
  using Error::Error;
};

/// A dataset holds no usable samples or features.
struct EmptyDataset : Error {
  using Error::Error;
};

/// A requested low-rank dimension exceeds the ambient dimension.
struct BadRank : Error {
  using Error::Error;
};

/// A benchmark configuration is invalid. The message names the field path.
struct ConfigError : Error {
  using Error::Error;
};

/// A performance profile needs at least two solvers.
struct TooFewSolvers : Error {
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DimensionMismatch(what);
}

}  // namespace detail

}  // namespace slbfgs

// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_ERRORS_HPP
#define RCM_ERRORS_HPP

#include <stdexcept>
#include <string>

// Failure taxonomy. Argument and shape violations use the std:: exception
// types directly; numerical failure modes get named classes so callers
// (training loops, studies, the CLI) can branch on them.

namespace rcm {

// Internal inconsistency of a decomposed quantity, e.g. a residual radicand
// more negative than roundoff allows.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fine-grid solver failure: factorization breakdown or a truth residual
// above the accept threshold.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reduced collocation matrix is numerically singular (expected for naive
// point sets); message names the reduced dimension.
class SingularSystemError : public SolverError {
 public:
  using SolverError::SolverError;
};

// Least squares normal matrix condition beyond 1/eps; message names N.
class IllConditionedModelError : public SolverError {
 public:
  using SolverError::SolverError;
};

// A new snapshot is numerically inside the span of the current basis.
class DegenerateBasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonpositive stability constant handed to the error bound.
class InvalidStabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, truncated or version-mismatched model file.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcm

#endif  // RCM_ERRORS_HPP

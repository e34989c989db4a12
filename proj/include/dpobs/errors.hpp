#pragma once

#include <stdexcept>
#include <string>

namespace dpobs {

/// Invalid input data or parameters (bad mesh extents, rho <= 0, mismatched meshes...).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate operator evaluation, e.g. |grad u| = 0 with p < 2 and no regularization.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A catalog function produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The reference QP solver found no KKT point. Always indicates a bug.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every start of a multi-start sample failed to converge.
class EmptySampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpobs

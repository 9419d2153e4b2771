#pragma once

#include <stdexcept>
#include <string>

namespace stablesums {

/// Input violates a documented precondition (CLI exit code 2).
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sample carries no information for the requested estimator
/// (constant data, all-zero series, no exceedances).
class degenerate_data_error : public precondition_error {
 public:
  using precondition_error::precondition_error;
};

/// A numerical routine (quadrature, optimizer, root finder) failed to reach
/// its tolerance (CLI exit code 3).
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw precondition_error(what);
}

}  // namespace stablesums

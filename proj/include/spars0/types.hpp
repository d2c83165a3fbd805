#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace spars0 {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when an input leaves the domain an operation is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a documented precondition does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Default zero tolerance: 1e-6 scaled by the magnitude of x.
inline double default_zero_tol(const Vector& x) {
  return 1e-6 * std::max(1.0, inf_norm(x));
}

inline constexpr double kActiveTol = 1e-6;

}  // namespace spars0

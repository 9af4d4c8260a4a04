#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cls {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Compressed-row sparse matrix; every operator in the library uses this layout.
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

using RealSparse = SparseMatrix<double>;
using ComplexSparse = SparseMatrix<Complex>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when an operator or state would exceed a configured memory cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by explicit integrators when the state stops being finite or
/// exceeds the divergence threshold.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(Index step, double max_magnitude, const std::string& scheme)
      : std::runtime_error(scheme + " diverged at step " + std::to_string(step) +
                           " (max |value| = " + std::to_string(max_magnitude) + ")"),
        step_(step),
        max_magnitude_(max_magnitude) {}

  Index step() const { return step_; }
  double max_magnitude() const { return max_magnitude_; }

 private:
  Index step_;
  double max_magnitude_;
};

/// Largest finite magnitude tolerated before an integrator aborts.
inline constexpr double kDivergenceThreshold = 1e12;

template <typename Scalar>
inline double real_part(const Scalar& value) {
  return std::real(value);
}

}  // namespace cls

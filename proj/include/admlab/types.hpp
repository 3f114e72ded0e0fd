#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace admlab {

/// Signed mode index. Example-1 style systems live on k >= 1, example-2 style on all of Z.
using ModeIndex = std::int64_t;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Contiguous closed range [first, last] of mode indices.
struct IndexWindow {
  ModeIndex first = 1;
  ModeIndex last = 0;

  [[nodiscard]] std::int64_t size() const { return last >= first ? last - first + 1 : 0; }
  [[nodiscard]] bool contains(ModeIndex k) const { return k >= first && k <= last; }
  [[nodiscard]] std::int64_t offset(ModeIndex k) const { return k - first; }

  friend bool operator==(const IndexWindow&, const IndexWindow&) = default;
};

/// Precondition or configuration violation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two objects that must share an index window do not.
class WindowMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A computation could not meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The probe point sits (numerically) on the spectrum of the feedback operator.
class NearEigenvalue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The probe point coincides with an entry of the diagonal part and no dense fallback is allowed.
class OnDiagonalSpectrum : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace admlab

#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "admlab/types.hpp"

namespace admlab {

/// exp(A) by diagonal pre-shift, scaling and squaring, and a [6/6] Pade approximant.
/// The shift by the mean eigenvalue trace(A)/n is undone by a scalar factor at the end.
template <typename Real>
[[nodiscard]] ComplexMatrix<Real> expm(const ComplexMatrix<Real>& A) {
  using C = Complex<Real>;
  const Eigen::Index n = A.rows();
  if (n != A.cols()) throw InvalidArgument("expm: matrix must be square");
  if (n == 0) return A;

  const C mu = A.trace() / static_cast<Real>(n);
  ComplexMatrix<Real> B = A;
  B.diagonal().array() -= mu;

  const Real norm1 = B.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > Real(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm1 / Real(0.5))));
  B /= std::ldexp(Real(1), squarings);

  constexpr int q = 6;
  Real c = 1;
  const ComplexMatrix<Real> I = ComplexMatrix<Real>::Identity(n, n);
  ComplexMatrix<Real> X = I;
  ComplexMatrix<Real> num = I;
  ComplexMatrix<Real> den = I;
  for (int j = 1; j <= q; ++j) {
    c = c * static_cast<Real>(q - j + 1) / static_cast<Real>(j * (2 * q - j + 1));
    X = B * X;
    num += c * X;
    den += (j % 2 == 0 ? c : -c) * X;
  }
  ComplexMatrix<Real> E = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return std::exp(mu) * E;
}

}  // namespace admlab

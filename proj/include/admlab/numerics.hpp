#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace admlab {

/// Pairwise (tree) summation. The reduction order depends only on the length of the input,
/// so results are reproducible regardless of how the terms were produced.
template <typename T>
[[nodiscard]] T pairwise_sum(std::span<const T> terms) {
  constexpr std::size_t kBlock = 8;
  if (terms.size() <= kBlock) {
    T acc{};
    for (const T& v : terms) acc += v;
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
[[nodiscard]] T pairwise_sum(const std::vector<T>& terms) {
  return pairwise_sum(std::span<const T>(terms.data(), terms.size()));
}

/// Squared Euclidean norm with pairwise reduction.
template <typename Vec>
[[nodiscard]] auto squared_norm_pairwise(const Vec& v) {
  using Real = typename Eigen::NumTraits<typename Vec::Scalar>::Real;
  std::vector<Real> sq(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) sq[static_cast<std::size_t>(i)] = std::norm(v[i]);
  return pairwise_sum(sq);
}

/// Enclosure and estimate of sum_{k > N} f(k) for a positive decreasing f.
template <typename Real>
struct TailSum {
  Real lower = 0;     // integral from N+1 to infinity
  Real upper = 0;     // integral from N to infinity
  Real estimate = 0;  // Euler-Maclaurin, two correction terms
};

/// `integral_from(x)` must return the integral of f over [x, inf).
template <typename Real, typename F, typename DF, typename I>
[[nodiscard]] TailSum<Real> decreasing_tail(Real N, F&& f, DF&& df, I&& integral_from) {
  TailSum<Real> t;
  t.lower = integral_from(N + 1);
  t.upper = integral_from(N);
  t.estimate = t.upper - f(N) / 2 - df(N) / 12;
  if (t.estimate < t.lower) t.estimate = t.lower;
  if (t.estimate > t.upper) t.estimate = t.upper;
  return t;
}

/// exp(z) - 1 without cancellation for small |z|.
template <typename Real>
[[nodiscard]] std::complex<Real> expm1_complex(std::complex<Real> z) {
  using std::cos;
  using std::exp;
  using std::expm1;
  using std::sin;
  const Real x = z.real();
  const Real y = z.imag();
  const Real s = sin(y / 2);
  const Real re = expm1(x) * cos(y) - 2 * s * s;
  const Real im = exp(x) * sin(y);
  return {re, im};
}

/// (exp(z) - 1) / z
template <typename Real>
[[nodiscard]] std::complex<Real> phi1(std::complex<Real> z) {
  if (std::abs(z) < Real(1e-3)) {
    // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
    std::complex<Real> acc = Real(1) / Real(720);
    for (int j : {5, 4, 3, 2, 1}) acc = acc * z + Real(1) / std::tgamma(Real(j + 1));
    return acc;
  }
  return expm1_complex(z) / z;
}

/// (exp(z) - 1 - z) / z^2
template <typename Real>
[[nodiscard]] std::complex<Real> phi2(std::complex<Real> z) {
  if (std::abs(z) < Real(5e-2)) {
    // sum_{j>=0} z^j / (j+2)!
    std::complex<Real> acc = 0;
    for (int j = 12; j >= 0; --j) acc = acc * z + Real(1) / std::tgamma(Real(j + 3));
    return acc;
  }
  return (expm1_complex(z) - z) / (z * z);
}

/// Largest integer n such that exp(-n) is still a normal floating-point number.
template <typename Real>
[[nodiscard]] long max_normal_exp_decay() {
  return static_cast<long>(std::floor(-std::log(std::numeric_limits<Real>::min())));
}

}  // namespace admlab

#pragma once

// Input map Phi_t(u) = int_0^t e^{A s} B u(s) ds for diagonal systems and structured inputs.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "admlab/numerics.hpp"
#include "admlab/spectral_core.hpp"
#include "admlab/types.hpp"

namespace admlab {

/// Piecewise modulated scalar input: u(s) = amplitude * exp(-i omega s) on [start, end), zero elsewhere.
template <typename Real>
class InputSignal {
 public:
  struct Piece {
    Real start = 0;
    Real end = 0;
    Complex<Real> amplitude{};
    Real omega = 0;
  };

  InputSignal() = default;

  explicit InputSignal(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    Real prev_end = 0;
    for (const Piece& p : pieces_) {
      if (!(p.start >= 0 && p.end > p.start))
        throw InvalidArgument("InputSignal: each piece needs 0 <= start < end");
      if (p.start < prev_end) throw InvalidArgument("InputSignal: pieces must be ordered and disjoint");
      prev_end = p.end;
    }
  }

  [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }
  [[nodiscard]] bool empty() const { return pieces_.empty(); }

  [[nodiscard]] Real l2_norm_squared() const {
    std::vector<Real> terms;
    for (const Piece& p : pieces_) terms.push_back(std::norm(p.amplitude) * (p.end - p.start));
    return pairwise_sum(terms);
  }
  [[nodiscard]] Real l2_norm() const { return std::sqrt(l2_norm_squared()); }

  [[nodiscard]] Complex<Real> operator()(Real s) const {
    for (const Piece& p : pieces_)
      if (s >= p.start && s < p.end) return p.amplitude * std::polar(Real(1), -p.omega * s);
    return {};
  }

  /// Support end; Phi_t is constant for t beyond it.
  [[nodiscard]] Real support_end() const { return pieces_.empty() ? Real(0) : pieces_.back().end; }

  [[nodiscard]] std::vector<Real> breakpoints() const {
    std::vector<Real> out;
    for (const Piece& p : pieces_) {
      out.push_back(p.start);
      out.push_back(p.end);
    }
    return out;
  }

  [[nodiscard]] InputSignal scaled(Complex<Real> c) const {
    InputSignal r = *this;
    for (Piece& p : r.pieces_) p.amplitude *= c;
    return r;
  }

  [[nodiscard]] Real max_abs_omega() const {
    Real m = 0;
    for (const Piece& p : pieces_) m = std::max(m, std::abs(p.omega));
    return m;
  }

 private:
  std::vector<Piece> pieces_;
};

/// u_n(s) = n^{-1/2} chi_[0,n](s) exp(-i beta_n s); unit L2 norm.
template <typename Real>
[[nodiscard]] InputSignal<Real> make_un_signal(ModeIndex n, Real beta_n) {
  if (n < 1) throw InvalidArgument("make_un_signal: n must be >= 1");
  const Real nr = static_cast<Real>(n);
  using Piece = typename InputSignal<Real>::Piece;
  return InputSignal<Real>({Piece{0, nr, Complex<Real>(1 / std::sqrt(nr), 0), beta_n}});
}

/// Below this |lambda - i omega| the antiderivative switches to its series form.
template <typename Real>
inline constexpr Real kDegenerateExponent = Real(1e-8);

/// int_0^t u(s) e^{lambda s} ds in closed form.
template <typename Real>
[[nodiscard]] Complex<Real> mode_integral(Complex<Real> lambda, const InputSignal<Real>& signal, Real t) {
  if (!(t >= 0)) throw InvalidArgument("mode_integral: t must be >= 0");
  Complex<Real> acc{};
  for (const auto& p : signal.pieces()) {
    const Real s0 = std::clamp(p.start, Real(0), t);
    const Real s1 = std::clamp(p.end, Real(0), t);
    if (!(s1 > s0)) continue;
    const Complex<Real> mu = lambda - Complex<Real>(0, p.omega);
    if (std::abs(mu) < kDegenerateExponent<Real>) {
      acc += p.amplitude * ((s1 - s0) + mu * (s1 * s1 - s0 * s0) / Real(2));
    } else {
      acc += p.amplitude * std::exp(mu * s0) * expm1_complex(mu * (s1 - s0)) / mu;
    }
  }
  return acc;
}

/// Phi_t(u) restricted to a truncation window.
template <typename Real>
struct TruncatedState {
  ComplexVector<Real> values;
  IndexWindow window;
  Real time = 0;

  [[nodiscard]] Real squared_norm() const { return squared_norm_pairwise(values); }
  [[nodiscard]] Real norm() const { return std::sqrt(squared_norm()); }
};

template <typename Real>
[[nodiscard]] TruncatedState<Real> phi_state(const TruncatedSystem<Real>& sys, const InputSignal<Real>& signal,
                                             Real t) {
  if (!(t >= 0)) throw InvalidArgument("phi_state: t must be >= 0");
  TruncatedState<Real> st;
  st.window = sys.window;
  st.time = t;
  st.values.resize(sys.size());
  for (Eigen::Index i = 0; i < sys.size(); ++i) st.values[i] = sys.b[i] * mode_integral(sys.lambda[i], signal, t);
  return st;
}

template <typename Real>
struct SupNorm {
  Real value = 0;
  Real argmax = 0;
};

/// max over the grid of ||Phi_t(u)||; a lower bound on the sup over all t.
template <typename Real>
[[nodiscard]] SupNorm<Real> phi_sup_norm(const TruncatedSystem<Real>& sys, const InputSignal<Real>& signal,
                                         const std::vector<Real>& t_grid) {
  if (t_grid.empty()) throw InvalidArgument("phi_sup_norm: empty time grid");
  SupNorm<Real> best{-1, t_grid.front()};
  for (Real t : t_grid) {
    const Real v = phi_state(sys, signal, t).norm();
    if (v > best.value) best = {v, t};
  }
  return best;
}

/// Geometric grid on [t_min, t_max] merged with every signal breakpoint inside it.
template <typename Real>
[[nodiscard]] std::vector<Real> default_time_grid(const InputSignal<Real>& signal, Real t_max, int points = 64,
                                                  Real t_min = Real(1e-3)) {
  if (!(t_max > t_min) || points < 2) throw InvalidArgument("default_time_grid: need t_max > t_min, points >= 2");
  std::vector<Real> grid;
  const Real ratio = std::log(t_max / t_min) / static_cast<Real>(points - 1);
  for (int j = 0; j < points; ++j) grid.push_back(t_min * std::exp(ratio * static_cast<Real>(j)));
  grid.back() = t_max;
  for (Real b : signal.breakpoints())
    if (b > 0 && b <= t_max) grid.push_back(b);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

template <typename Real>
struct QuadratureResult {
  Complex<Real> value{};
  Real error_estimate = 0;
  bool converged = true;
};

/// Composite Simpson with Richardson extrapolation, panels sized by the integrand's oscillation rate.
/// Independent of mode_integral: the integrand is evaluated pointwise.
template <typename Real>
[[nodiscard]] QuadratureResult<Real> quadrature_oracle(Complex<Real> lambda, const InputSignal<Real>& signal, Real t,
                                                       int panels_per_period = 16, Real rel_tol = Real(1e-11)) {
  if (panels_per_period < 8) throw InvalidArgument("quadrature_oracle: panels_per_period must be >= 8");
  if (!(t >= 0)) throw InvalidArgument("quadrature_oracle: t must be >= 0");
  QuadratureResult<Real> out;
  for (const auto& p : signal.pieces()) {
    const Real s0 = std::clamp(p.start, Real(0), t);
    const Real s1 = std::clamp(p.end, Real(0), t);
    if (!(s1 > s0)) continue;
    auto f = [&](Real s) {
      return p.amplitude * std::polar(Real(1), -p.omega * s) * std::exp(lambda * s);
    };
    auto simpson = [&](long n) {
      const Real h = (s1 - s0) / static_cast<Real>(n);
      Complex<Real> acc = f(s0) + f(s1);
      for (long j = 1; j < n; ++j) acc += Real(j % 2 == 1 ? 4 : 2) * f(s0 + h * static_cast<Real>(j));
      return acc * h / Real(3);
    };
    // the integrand oscillates at |Im lambda - omega| and varies at |Re lambda|
    const Real rate = std::max({std::abs(lambda.imag() - p.omega), std::abs(lambda.real()), Real(1)});
    const Real period = 2 * std::numbers::pi_v<Real> / rate;
    long n = static_cast<long>(std::ceil((s1 - s0) / period * panels_per_period));
    n = std::max(n, 2L);
    n += n % 2;
    Complex<Real> coarse = simpson(n);
    Complex<Real> fine = simpson(2 * n);
    Real err = std::abs(fine - coarse) / 15;
    constexpr long kMaxPanels = 1L << 24;
    while (err > rel_tol * (1 + std::abs(fine)) && 4 * n <= kMaxPanels) {
      n *= 2;
      coarse = fine;
      fine = simpson(2 * n);
      err = std::abs(fine - coarse) / 15;
    }
    if (err > rel_tol * (1 + std::abs(fine))) out.converged = false;
    out.value += fine + (fine - coarse) / Real(15);
    out.error_estimate += err;
  }
  return out;
}

}  // namespace admlab

#pragma once

// Collocated rank-one feedback A = D - b b^* on a truncated diagonal system.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "admlab/matrix_exponential.hpp"
#include "admlab/mild_solution.hpp"
#include "admlab/numerics.hpp"
#include "admlab/spectral_core.hpp"
#include "admlab/types.hpp"

namespace admlab {

/// Largest dimension that is ever materialized as a dense matrix.
inline constexpr Eigen::Index kDenseLimit = 1024;

template <typename Real>
class FeedbackSystem {
 public:
  FeedbackSystem(TruncatedSystem<Real> base, ComplexVector<Real> b) : base_(std::move(base)), b_(std::move(b)) {
    if (b_.size() != base_.size())
      throw WindowMismatch("assemble_feedback: control has " + std::to_string(b_.size()) + " entries, base has " +
                           std::to_string(base_.size()));
  }

  [[nodiscard]] const TruncatedSystem<Real>& base() const { return base_; }
  [[nodiscard]] const ComplexVector<Real>& diagonal() const { return base_.lambda; }
  [[nodiscard]] const ComplexVector<Real>& b() const { return b_; }
  [[nodiscard]] Eigen::Index size() const { return b_.size(); }

  /// x -> D x - b (b^* x)
  [[nodiscard]] ComplexVector<Real> apply(const ComplexVector<Real>& x) const {
    const Complex<Real> bx = b_.dot(x);  // conjugates b
    return base_.lambda.cwiseProduct(x) - bx * b_;
  }

  [[nodiscard]] ComplexMatrix<Real> dense() const {
    require_dense("dense");
    ComplexMatrix<Real> M = -b_ * b_.adjoint();
    M.diagonal() += base_.lambda;
    return M;
  }

  /// The perturbation Q = b b^* between A and the diagonal part.
  [[nodiscard]] ComplexMatrix<Real> perturbation_dense() const {
    require_dense("perturbation_dense");
    return b_ * b_.adjoint();
  }

  void require_dense(const char* what) const {
    if (size() > kDenseLimit)
      throw InvalidArgument(std::string(what) + ": dimension " + std::to_string(size()) + " exceeds dense limit " +
                            std::to_string(kDenseLimit));
  }

 private:
  TruncatedSystem<Real> base_;
  ComplexVector<Real> b_;
};

template <typename Real>
[[nodiscard]] FeedbackSystem<Real> assemble_feedback(TruncatedSystem<Real> base, ComplexVector<Real> b) {
  return FeedbackSystem<Real>(std::move(base), std::move(b));
}

/// A_0 - B B^* with the control of the base system itself.
template <typename Real>
[[nodiscard]] FeedbackSystem<Real> assemble_feedback(TruncatedSystem<Real> base) {
  ComplexVector<Real> b = base.b;
  return FeedbackSystem<Real>(std::move(base), std::move(b));
}

namespace detail {

template <typename Real>
ComplexVector<Real> dense_resolvent_solve(const FeedbackSystem<Real>& fs, Complex<Real> z,
                                          const ComplexVector<Real>& x) {
  ComplexMatrix<Real> M = fs.dense();
  M.diagonal().array() -= z;
  Eigen::PartialPivLU<ComplexMatrix<Real>> lu(M);
  if (!(lu.rcond() > 64 * std::numeric_limits<Real>::epsilon()))
    throw NearEigenvalue("z is (numerically) an eigenvalue of the feedback operator");
  return lu.solve(x);
}

}  // namespace detail

/// (A - z)^{-1} x via the Sherman-Morrison identity on the diagonal resolvent R = (D - z)^{-1}:
/// y = R x + (b^* R x) / (1 - b^* R b) R b. Falls back to a dense solve when z hits the diagonal
/// spectrum or the denominator drops below 1e-12.
template <typename Real>
[[nodiscard]] ComplexVector<Real> resolvent_apply(const FeedbackSystem<Real>& fs, Complex<Real> z,
                                                  const ComplexVector<Real>& x) {
  constexpr Real kSafeguard = Real(1e-12);
  constexpr Real kResidual = Real(1e-10);
  if (x.size() != fs.size()) throw WindowMismatch("resolvent_apply: vector length mismatch");

  auto residual_ok = [&](const ComplexVector<Real>& y) {
    const ComplexVector<Real> r = fs.apply(y) - z * y - x;
    return r.norm() <= kResidual * x.norm();
  };
  auto dense_or = [&](auto&& err) -> ComplexVector<Real> {
    if (fs.size() > kDenseLimit) throw err;
    ComplexVector<Real> y = detail::dense_resolvent_solve(fs, z, x);
    if (!residual_ok(y)) throw NumericalError("resolvent_apply: dense solve missed the residual tolerance");
    return y;
  };

  const ComplexVector<Real> shifted = fs.diagonal().array() - z;
  const Real scale = std::max(Real(1), shifted.cwiseAbs().maxCoeff());
  if ((shifted.cwiseAbs().array() <= std::numeric_limits<Real>::epsilon() * scale).any())
    return dense_or(OnDiagonalSpectrum("resolvent_apply: z lies on the diagonal spectrum"));

  const ComplexVector<Real> Rx = x.cwiseQuotient(shifted);
  const ComplexVector<Real> Rb = fs.b().cwiseQuotient(shifted);
  const Complex<Real> d = Real(1) - fs.b().dot(Rb);
  if (std::abs(d) < kSafeguard)
    return dense_or(NearEigenvalue("z is (numerically) an eigenvalue of the feedback operator"));

  ComplexVector<Real> y = Rx + (fs.b().dot(Rx) / d) * Rb;
  if (!residual_ok(y)) return dense_or(NumericalError("resolvent_apply: Sherman-Morrison residual too large"));
  return y;
}

namespace detail {

/// Cox-Matthews ETD2RK for x' = D x - b (b^* x) with `steps` equal steps.
template <typename Real>
ComplexVector<Real> etd2rk(const FeedbackSystem<Real>& fs, const ComplexVector<Real>& x0, Real t, long steps) {
  const Real h = t / static_cast<Real>(steps);
  const Eigen::Index n = fs.size();
  ComplexVector<Real> ez(n), hp1(n), hp2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex<Real> z = fs.diagonal()[i] * h;
    ez[i] = std::exp(z);
    hp1[i] = h * phi1(z);
    hp2[i] = h * phi2(z);
  }
  const ComplexVector<Real>& b = fs.b();
  auto nonlinear = [&](const ComplexVector<Real>& v) -> ComplexVector<Real> { return -(b.dot(v)) * b; };

  ComplexVector<Real> x = x0;
  for (long s = 0; s < steps; ++s) {
    const ComplexVector<Real> Nx = nonlinear(x);
    const ComplexVector<Real> a = ez.cwiseProduct(x) + hp1.cwiseProduct(Nx);
    x = a + hp2.cwiseProduct(nonlinear(a) - Nx);
  }
  return x;
}

}  // namespace detail

enum class EvolveMethod { DenseExponential, ExponentialIntegrator };

/// x(t) = e^{A t} x0.
/// DenseExponential: expm of the materialized matrix.
/// ExponentialIntegrator: ETD2RK with the diagonal part integrated exactly and the rank-one
/// term -b (b^* x) treated explicitly; fixed step no larger than max_step, Richardson-combined
/// with the half step.
template <typename Real>
[[nodiscard]] ComplexVector<Real> evolve(const FeedbackSystem<Real>& fs, const ComplexVector<Real>& x0, Real t,
                                         EvolveMethod method = EvolveMethod::DenseExponential,
                                         Real max_step = Real(1e-3)) {
  if (!(t >= 0)) throw InvalidArgument("evolve: t must be >= 0");
  if (x0.size() != fs.size()) throw WindowMismatch("evolve: vector length mismatch");
  if (t == 0) return x0;

  if (method == EvolveMethod::DenseExponential) {
    const ComplexMatrix<Real> At = fs.dense() * Complex<Real>(t);
    return expm(At) * x0;
  }

  const long steps = std::max(1L, static_cast<long>(std::ceil(t / max_step)));
  const ComplexVector<Real> coarse = detail::etd2rk(fs, x0, t, steps);
  const ComplexVector<Real> fine = detail::etd2rk(fs, x0, t, 2 * steps);
  return fine + (fine - coarse) / Real(3);
}

enum class FeedbackPhiRoute { Auto, Modal, Quadrature };

/// int_0^t e^{A s} b u(s) ds.
/// Modal: eigen-decomposition A = V diag(mu) V^{-1} and the closed-form mode integrals in mu.
/// Quadrature: composite Simpson on each piece with Richardson correction; node vectors are
/// propagated with a dense exponential, step h <= min(piece, 0.25/max(1,|omega|), 0.25/max(1,max|Im lambda|),
/// 0.1/max(1, ||A|| + |omega|)).
/// Auto picks Modal unless the eigenvector basis is ill-conditioned.
template <typename Real>
[[nodiscard]] ComplexVector<Real> feedback_phi(const FeedbackSystem<Real>& fs, const InputSignal<Real>& signal, Real t,
                                               FeedbackPhiRoute route = FeedbackPhiRoute::Auto);

namespace detail {

template <typename Real>
struct ModalBasis {
  ComplexVector<Real> mu;
  ComplexMatrix<Real> V;
  ComplexVector<Real> coeff;  // V^{-1} b
  Real condition = std::numeric_limits<Real>::infinity();
};

template <typename Real>
ModalBasis<Real> modal_basis(const FeedbackSystem<Real>& fs) {
  ModalBasis<Real> m;
  Eigen::ComplexEigenSolver<ComplexMatrix<Real>> es(fs.dense(), true);
  if (es.info() != Eigen::Success) return m;
  m.mu = es.eigenvalues();
  m.V = es.eigenvectors();
  Eigen::PartialPivLU<ComplexMatrix<Real>> lu(m.V);
  const Real rc = lu.rcond();
  if (!(rc > 0)) return m;
  m.condition = 1 / rc;
  m.coeff = lu.solve(fs.b());
  return m;
}

template <typename Real>
ComplexVector<Real> modal_phi(const ModalBasis<Real>& m, const InputSignal<Real>& signal, Real t) {
  ComplexVector<Real> w(m.mu.size());
  for (Eigen::Index j = 0; j < m.mu.size(); ++j) w[j] = m.coeff[j] * mode_integral(m.mu[j], signal, t);
  return m.V * w;
}

template <typename Real>
ComplexVector<Real> quadrature_phi(const FeedbackSystem<Real>& fs, const InputSignal<Real>& signal, Real t) {
  const ComplexMatrix<Real> A = fs.dense();
  const Real im_max = fs.diagonal().size() ? fs.diagonal().imag().cwiseAbs().maxCoeff() : Real(0);
  // bound on ||A||: the integrand varies at most at rate ||A|| + |omega|
  const Real a_norm = (fs.diagonal().size() ? fs.diagonal().cwiseAbs().maxCoeff() : Real(0)) + fs.b().squaredNorm();
  ComplexVector<Real> v = fs.b();  // e^{A s} b at the current position s
  Real pos = 0;
  ComplexVector<Real> acc = ComplexVector<Real>::Zero(fs.size());
  auto advance = [&](Real to) {
    if (to > pos) v = expm<Real>(A * Complex<Real>(to - pos)) * v;
    pos = to;
  };
  for (const auto& p : signal.pieces()) {
    const Real s0 = std::clamp(p.start, Real(0), t);
    const Real s1 = std::clamp(p.end, Real(0), t);
    if (!(s1 > s0)) continue;
    advance(s0);
    const Real len = s1 - s0;
    const Real h = std::min({len, Real(0.25) / std::max(Real(1), std::abs(p.omega)),
                             Real(0.25) / std::max(Real(1), im_max),
                             Real(0.1) / std::max(Real(1), a_norm + std::abs(p.omega))});
    long n = static_cast<long>(std::ceil(len / h));
    n += n % 2;
    // Simpson on 2n panels, corrected by the n-panel result: nodes at spacing len / (2n)
    const long m = 2 * n;
    const Real delta = len / static_cast<Real>(m);
    const ComplexMatrix<Real> step = expm<Real>(A * Complex<Real>(delta));
    ComplexVector<Real> fine = ComplexVector<Real>::Zero(fs.size());
    ComplexVector<Real> coarse = ComplexVector<Real>::Zero(fs.size());
    ComplexVector<Real> node = v;
    for (long j = 0; j <= m; ++j) {
      const Real s = s0 + delta * static_cast<Real>(j);
      const Complex<Real> us = p.amplitude * std::polar(Real(1), -p.omega * s);
      const Real wf = (j == 0 || j == m) ? Real(1) : Real(j % 2 == 1 ? 4 : 2);
      fine += (wf * us) * node;
      if (j % 2 == 0) {
        const long jc = j / 2;
        const Real wc = (jc == 0 || jc == n) ? Real(1) : Real(jc % 2 == 1 ? 4 : 2);
        coarse += (wc * us) * node;
      }
      if (j < m) node = step * node;
    }
    fine *= delta / Real(3);
    coarse *= 2 * delta / Real(3);
    acc += fine + (fine - coarse) / Real(15);
    v = node;
    pos = s1;
  }
  return acc;
}

}  // namespace detail

template <typename Real>
ComplexVector<Real> feedback_phi(const FeedbackSystem<Real>& fs, const InputSignal<Real>& signal, Real t,
                                 FeedbackPhiRoute route) {
  if (!(t >= 0)) throw InvalidArgument("feedback_phi: t must be >= 0");
  if (signal.empty() || t == 0) return ComplexVector<Real>::Zero(fs.size());
  if (route == FeedbackPhiRoute::Quadrature) return detail::quadrature_phi(fs, signal, t);
  const detail::ModalBasis<Real> m = detail::modal_basis(fs);
  constexpr Real kMaxCondition = Real(1e8);
  if (m.condition <= kMaxCondition) return detail::modal_phi(m, signal, t);
  if (route == FeedbackPhiRoute::Modal) throw NumericalError("feedback_phi: eigenvector basis is ill-conditioned");
  return detail::quadrature_phi(fs, signal, t);
}

/// Reusable modal evaluator for many (signal, t) pairs on the same operator.
template <typename Real>
class FeedbackPhiEvaluator {
 public:
  explicit FeedbackPhiEvaluator(const FeedbackSystem<Real>& fs) : fs_(&fs), modal_(detail::modal_basis(fs)) {}

  [[nodiscard]] bool modal() const { return modal_.condition <= Real(1e8); }
  [[nodiscard]] Real condition() const { return modal_.condition; }

  [[nodiscard]] ComplexVector<Real> operator()(const InputSignal<Real>& signal, Real t) const {
    if (!(t >= 0)) throw InvalidArgument("feedback_phi: t must be >= 0");
    if (signal.empty() || t == 0) return ComplexVector<Real>::Zero(fs_->size());
    if (modal()) return detail::modal_phi(modal_, signal, t);
    return detail::quadrature_phi(*fs_, signal, t);
  }

 private:
  const FeedbackSystem<Real>* fs_;
  detail::ModalBasis<Real> modal_;
};

enum class ExpStabilityVerdict { ExponentiallyStable, NotExponentiallyStableEvidence, Inconclusive };

[[nodiscard]] inline std::string_view to_string(ExpStabilityVerdict v) {
  switch (v) {
    case ExpStabilityVerdict::ExponentiallyStable: return "exponentially-stable";
    case ExpStabilityVerdict::NotExponentiallyStableEvidence: return "not-exponentially-stable-evidence";
    case ExpStabilityVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

template <typename Real>
struct StabilityReport {
  std::vector<Complex<Real>> truncated_spectrum;
  Real spectral_abscissa = -std::numeric_limits<Real>::infinity();
  bool contraction_ok = false;
  Real hermitian_part_max = 0;  // largest eigenvalue of (A + A^*)/2
  std::vector<std::pair<Real, Real>> strong_decay_samples;     // (t, ||x(t)||)
  std::vector<std::pair<ModeIndex, Real>> non_exp_witnesses;   // (n, |b_n| ||b||)
  std::vector<std::pair<ModeIndex, Real>> abscissa_trend;      // (N, max Re over window of size N)
  ExpStabilityVerdict exp_stability_verdict = ExpStabilityVerdict::Inconclusive;
};

/// Dense eigenvalues of A and the spectral abscissa.
template <typename Real>
[[nodiscard]] StabilityReport<Real> truncated_spectrum(const FeedbackSystem<Real>& fs) {
  StabilityReport<Real> rep;
  Eigen::ComplexEigenSolver<ComplexMatrix<Real>> es(fs.dense(), false);
  if (es.info() != Eigen::Success) throw NumericalError("truncated_spectrum: eigensolver did not converge");
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    rep.truncated_spectrum.push_back(es.eigenvalues()[i]);
    rep.spectral_abscissa = std::max(rep.spectral_abscissa, es.eigenvalues()[i].real());
  }
  std::sort(rep.truncated_spectrum.begin(), rep.truncated_spectrum.end(), [](auto a, auto b) {
    return a.imag() < b.imag() || (a.imag() == b.imag() && a.real() < b.real());
  });
  return rep;
}

/// |b_n| ||b||: since (A - lambda_n) e_n = -b_n b exactly, this bounds sigma_min(A - lambda_n) from above.
template <typename Real>
[[nodiscard]] Real non_exponential_witness(const FeedbackSystem<Real>& fs, ModeIndex n) {
  const Eigen::Index i = fs.base().position_of(n);
  return std::abs(fs.b()[i]) * fs.b().norm();
}

struct CollocatedHypotheses {
  bool distinct_eigenvalues = false;
  bool nonzero_control = false;
  bool dissipative_diagonal = false;  // Re lambda_k <= 0
  bool modulus_unbounded = false;     // |lambda_k| -> infinity along the family
  [[nodiscard]] bool all() const {
    return distinct_eigenvalues && nonzero_control && dissipative_diagonal && modulus_unbounded;
  }
};

template <typename Real>
[[nodiscard]] CollocatedHypotheses collocated_hypotheses_check(const TruncatedSystem<Real>& base,
                                                               const ComplexVector<Real>& b) {
  if (b.size() != base.size()) throw WindowMismatch("collocated_hypotheses_check: size mismatch");
  CollocatedHypotheses h;
  std::vector<std::pair<Real, Real>> keys;
  for (Eigen::Index i = 0; i < base.size(); ++i) keys.emplace_back(base.lambda[i].real(), base.lambda[i].imag());
  std::sort(keys.begin(), keys.end());
  h.distinct_eigenvalues = std::adjacent_find(keys.begin(), keys.end()) == keys.end();
  h.nonzero_control = (b.array() != Complex<Real>(0)).all();
  h.dissipative_diagonal = (base.lambda.real().array() <= 0).all();
  h.modulus_unbounded = base.origin && base.origin->modulus_unbounded();
  return h;
}

template <typename Real>
struct StabilityOptions {
  std::vector<Real> decay_times{0, 1, 10, 100, 1000, 10000};
  std::vector<ModeIndex> witness_indices;  // empty: minimum of |b_n| per complete dyadic block
};

/// Spectrum, dissipativity, decay samples of e^{At} b/||b|| and the non-exponential witnesses.
template <typename Real>
[[nodiscard]] StabilityReport<Real> stability_report(const FeedbackSystem<Real>& fs,
                                                     const StabilityOptions<Real>& opts = {}) {
  StabilityReport<Real> rep = truncated_spectrum(fs);

  ComplexMatrix<Real> A = fs.dense();
  const ComplexMatrix<Real> H = (A + A.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> herm(H, Eigen::EigenvaluesOnly);
  rep.hermitian_part_max = herm.eigenvalues().maxCoeff();
  rep.contraction_ok = rep.hermitian_part_max <= 64 * std::numeric_limits<Real>::epsilon() * A.norm();

  const Real bn = fs.b().norm();
  if (bn > 0) {
    const ComplexVector<Real> x0 = fs.b() / bn;
    for (Real t : opts.decay_times) rep.strong_decay_samples.emplace_back(t, evolve(fs, x0, t).norm());
  }

  std::vector<ModeIndex> idx = opts.witness_indices;
  if (idx.empty()) {
    std::map<int, std::pair<ModeIndex, Real>> best;
    for (Eigen::Index i = 0; i < fs.size(); ++i) {
      const ModeIndex k = fs.base().index_at(i);
      if (k < 1) continue;
      const int block = std::bit_width(static_cast<std::uint64_t>(k)) - 1;
      if (fs.base().window.last < (ModeIndex(2) << block) - 1) continue;  // incomplete block
      const Real mag = std::abs(fs.b()[i]);
      if (mag == 0) continue;
      auto [it, inserted] = best.try_emplace(block, k, mag);
      if (!inserted && mag < it->second.second) it->second = {k, mag};
    }
    for (const auto& [block, e] : best) idx.push_back(e.first);
  }
  for (ModeIndex n : idx) rep.non_exp_witnesses.emplace_back(n, non_exponential_witness(fs, n));

  // Resolvent lower bounds 1/(|b_n| ||b||) growing along Re lambda_n -> 0 contradict any uniform
  // bound M / (Re z - omega); a finite truncation alone is always exponentially stable.
  bool growing = rep.non_exp_witnesses.size() >= 3;
  for (std::size_t j = 1; j < rep.non_exp_witnesses.size(); ++j)
    if (!(rep.non_exp_witnesses[j].second < rep.non_exp_witnesses[j - 1].second)) growing = false;
  const auto* origin = fs.base().origin.get();
  if (origin && origin->abscissa_zero() && growing)
    rep.exp_stability_verdict = ExpStabilityVerdict::NotExponentiallyStableEvidence;
  else if (origin && !origin->infinite_family() && rep.spectral_abscissa < 0)
    rep.exp_stability_verdict = ExpStabilityVerdict::ExponentiallyStable;
  else
    rep.exp_stability_verdict = ExpStabilityVerdict::Inconclusive;
  return rep;
}

/// Stability evidence for a diagonal generator: spectrum is the diagonal itself, and the
/// abscissa over growing windows tracks sup Re lambda_k.
template <typename Real>
[[nodiscard]] StabilityReport<Real> diagonal_stability_report(const TruncatedSystem<Real>& sys,
                                                              const std::vector<ModeIndex>& window_sizes) {
  StabilityReport<Real> rep;
  for (Eigen::Index i = 0; i < sys.size(); ++i) {
    rep.truncated_spectrum.push_back(sys.lambda[i]);
    rep.spectral_abscissa = std::max(rep.spectral_abscissa, sys.lambda[i].real());
  }
  rep.contraction_ok = rep.spectral_abscissa <= 0;
  rep.hermitian_part_max = rep.spectral_abscissa;
  for (ModeIndex N : window_sizes) {
    const IndexWindow w = sys.origin ? sys.origin->window_for(N) : IndexWindow{sys.window.first, sys.window.first + N - 1};
    Real a = -std::numeric_limits<Real>::infinity();
    for (ModeIndex k = std::max(w.first, sys.window.first); k <= std::min(w.last, sys.window.last); ++k)
      a = std::max(a, sys.lambda[sys.position_of(k)].real());
    rep.abscissa_trend.emplace_back(N, a);
  }
  bool rising = rep.abscissa_trend.size() >= 3;
  for (std::size_t j = 1; j < rep.abscissa_trend.size(); ++j)
    if (!(rep.abscissa_trend[j].second > rep.abscissa_trend[j - 1].second)) rising = false;
  if (sys.origin && sys.origin->abscissa_zero() && rising)
    rep.exp_stability_verdict = ExpStabilityVerdict::NotExponentiallyStableEvidence;
  else if (sys.origin && !sys.origin->infinite_family() && rep.spectral_abscissa < 0)
    rep.exp_stability_verdict = ExpStabilityVerdict::ExponentiallyStable;
  return rep;
}

}  // namespace admlab

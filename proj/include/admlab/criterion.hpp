#pragma once

// Infinite-time admissibility for diagonal generators with scalar input:
// B is admissible iff Re z * S(z) stays bounded on the right half-plane, where
// S(z) = sum_k |b_k|^2 / |z - lambda_k|^2.

#include <algorithm>
#include <bit>
#include <map>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "admlab/numerics.hpp"
#include "admlab/spectral_core.hpp"
#include "admlab/types.hpp"

namespace admlab {

enum class ProbeSource { Grid, EigenvalueMirror, Example2Probe, User };

[[nodiscard]] inline std::string_view to_string(ProbeSource s) {
  switch (s) {
    case ProbeSource::Grid: return "grid";
    case ProbeSource::EigenvalueMirror: return "eigenvalue-mirror";
    case ProbeSource::Example2Probe: return "example2-probe";
    case ProbeSource::User: return "user";
  }
  return "unknown";
}

/// Point of the open right half-plane.
template <typename Real>
struct ProbePoint {
  Complex<Real> z;
  ProbeSource source = ProbeSource::User;
  ModeIndex n = 0;  // mode the probe was built from (mirrors and example2 probes)

  ProbePoint(Complex<Real> z_, ProbeSource s = ProbeSource::User, ModeIndex n_ = 0) : z(z_), source(s), n(n_) {
    if (!(z.real() > 0)) throw InvalidArgument("ProbePoint: Re z must be > 0");
  }
};

/// z_n = e^{-n} + i n, the probe sequence along which Re z S(z) blows up for A'.
template <typename Real>
[[nodiscard]] ProbePoint<Real> probe_example2(ModeIndex n) {
  if (n < 1) throw InvalidArgument("probe_example2: n must be >= 1");
  if (n > max_normal_exp_decay<Real>())
    throw InvalidArgument("probe_example2: e^{-n} underflows for n=" + std::to_string(n));
  return ProbePoint<Real>({std::exp(-static_cast<Real>(n)), static_cast<Real>(n)}, ProbeSource::Example2Probe, n);
}

template <typename Real>
struct CriterionValue {
  Real value = 0;       // S(z) over the window
  Real scaled = 0;      // Re z * S(z), computed without forming S(z)
  Real tail_bound = 0;  // bound on the omitted part of S(z); +inf when none is available
};

namespace detail {

/// Upper bound on sum over omitted modes of |b_k|^2 / |z - lambda_k|^2, using
/// |z - lambda_k| >= max(Re z + |Re lambda_k|, |Im z - Im lambda_k|).
template <typename Real>
Real criterion_tail(const TruncatedSystem<Real>& ts, Complex<Real> z) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  constexpr Real kInf = std::numeric_limits<Real>::infinity();
  const DiagonalSystem<Real>& sys = *ts.origin;
  const Real x = z.real();
  const Real y = z.imag();

  auto term_bound = [&](ModeIndex k) {
    const Complex<Real> l = sys.generate_eigenvalue(k);
    const Real a = x + std::abs(l.real());
    const Real d = std::abs(y - l.imag());
    const Real den = std::max(a * a, d * d);
    return std::norm(sys.generate_control(k)) / den;
  };

  // Modes k > N on a branch with Im lambda_k = s k^p: exact bounds up to K0, beyond K0
  // Im lambda_k - y >= Im lambda_k / 2 so the term is <= 4 |b_k|^2 / (s^2 k^{2p}).
  // `envelope_tail(K0)` bounds sum_{k > K0} |b_k|^2 k^{-2p}.
  auto growth_route = [&](ModeIndex N, Real s, Real p, auto&& envelope_tail) -> Real {
    const Real threshold = std::pow(2 * std::max(y, Real(0)) / s, 1 / p);
    constexpr Real kMaxExplicit = 2e6;
    if (threshold - static_cast<Real>(N) > kMaxExplicit) return kInf;
    const ModeIndex K0 = std::max<ModeIndex>(N, static_cast<ModeIndex>(std::ceil(threshold)));
    std::vector<Real> terms;
    for (ModeIndex k = N + 1; k <= K0; ++k) terms.push_back(term_bound(k));
    const std::optional<Real> env = envelope_tail(static_cast<Real>(K0));
    if (!env) return kInf;
    return pairwise_sum(terms) + 4 / (s * s) * *env;
  };

  const ModeIndex N = ts.window.last;
  const Real Nr = static_cast<Real>(N);
  switch (sys.kind()) {
    case Kind::Example1: {
      Real generic = ts.tail_b_sq ? *ts.tail_b_sq / (x * x) : kInf;
      if (auto law = sys.beta().growth_law()) {
        const auto [s, p] = *law;
        // |b_k|^2 <= k^{-3/4}
        const Real routed = growth_route(N, s, p, [&](Real K0) -> std::optional<Real> {
          const Real e = Real(0.75) + 2 * p;
          if (!(e > 1)) return std::nullopt;
          return power_tail(K0, e);
        });
        generic = std::min(generic, routed);
      }
      return generic;
    }
    case Kind::Example2A:
    case Kind::Example2APrime: {
      // k < -N: (1/m) / (x + sqrt(m+1))^2 <= 1/(m(m+1)), telescoping to 1/(N+1)
      const Real negative = 1 / (Nr + 1);
      const Real generic = 1 / (Nr * x * x);
      const Real routed = growth_route(N, Real(1), Real(1), [](Real K0) -> std::optional<Real> {
        return power_tail(K0, Real(4));
      });
      return negative + std::min(generic, routed);
    }
    case Kind::PowerLaw: {
      const auto& pp = sys.power_params();
      Real generic = ts.tail_b_sq ? *ts.tail_b_sq / (x * x) : kInf;
      const Real routed = growth_route(N, pp.freq_scale, pp.freq_power, [&](Real K0) -> std::optional<Real> {
        const Real e = 2 * pp.control_decay + 2 * pp.freq_power;
        if (!(e > 1)) return std::nullopt;
        return pp.control_scale * pp.control_scale * power_tail(K0, e);
      });
      return std::min(generic, routed);
    }
    case Kind::Explicit: {
      std::vector<Real> terms;
      for (ModeIndex k = ts.window.last + 1; k <= sys.window().last; ++k) terms.push_back(term_bound(k));
      return pairwise_sum(terms);
    }
  }
  return kInf;
}

}  // namespace detail

/// S(z) over the truncation window plus a certified bound on the omitted modes.
template <typename Real>
[[nodiscard]] CriterionValue<Real> criterion_sum(const TruncatedSystem<Real>& sys, const ProbePoint<Real>& probe) {
  const Complex<Real> z = probe.z;
  const Real x = z.real();
  const Real sx = std::sqrt(x);
  std::vector<Real> scaled(static_cast<std::size_t>(sys.size()));
  for (Eigen::Index i = 0; i < sys.size(); ++i) {
    // (sqrt(Re z) |b_k| / |z - lambda_k|)^2 stays finite for e^{n}-sized witnesses
    const Real r = sx * std::abs(sys.b[i]) / std::abs(z - sys.lambda[i]);
    scaled[static_cast<std::size_t>(i)] = r * r;
  }
  CriterionValue<Real> out;
  out.scaled = pairwise_sum(scaled);
  out.value = out.scaled / x;
  out.tail_bound = sys.origin ? detail::criterion_tail(sys, z) : Real(0);
  return out;
}

/// ||(z - A)^{-1} B|| = sqrt(S(z)) for a diagonal generator and scalar input.
template <typename Real>
[[nodiscard]] Real resolvent_control_norm(const TruncatedSystem<Real>& sys, const ProbePoint<Real>& probe) {
  return std::sqrt(criterion_sum(sys, probe).value);
}

/// Sum of |b_k|^2 / |Re lambda_k| split by side of the index set.
template <typename Real>
struct MBound {
  struct Part {
    Real window_sum = 0;
    TailSum<Real> tail{};
    [[nodiscard]] Real estimate() const { return window_sum + tail.estimate; }
    [[nodiscard]] Real upper() const { return window_sum + tail.upper; }
  };

  bool divergent = false;
  Part positive;     // k >= 1
  Part nonpositive;  // k <= 0 (Z-indexed families)

  [[nodiscard]] Real estimate() const { return positive.estimate() + nonpositive.estimate(); }
  [[nodiscard]] Real certified_upper() const { return positive.upper() + nonpositive.upper(); }
};

/// M = sum_k |b_k|^2 / |Re lambda_k| with Euler-Maclaurin tail estimate and integral-test enclosure.
template <typename Real>
[[nodiscard]] MBound<Real> m_bound(const TruncatedSystem<Real>& sys) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  MBound<Real> m;
  std::vector<Real> pos, neg;
  for (Eigen::Index i = 0; i < sys.size(); ++i) {
    const Real term = std::norm(sys.b[i]) / std::abs(sys.lambda[i].real());
    (sys.index_at(i) >= 1 ? pos : neg).push_back(term);
  }
  m.positive.window_sum = pairwise_sum(pos);
  m.nonpositive.window_sum = pairwise_sum(neg);
  if (!sys.origin) return m;

  const DiagonalSystem<Real>& fam = *sys.origin;
  const Real N = static_cast<Real>(sys.window.last);
  switch (fam.kind()) {
    case Kind::Example1:        // sum over non-squares of k * k^-2 diverges
    case Kind::Example2APrime:  // k^-2 e^{k} diverges
      m.divergent = true;
      break;
    case Kind::Example2A:
      // k >= 1: k^{-3/2}
      m.positive.tail = decreasing_tail<Real>(
          N, [](Real x) { return std::pow(x, Real(-1.5)); }, [](Real x) { return Real(-1.5) * std::pow(x, Real(-2.5)); },
          [](Real x) { return 2 / std::sqrt(x); });
      // k = -m <= -1: 1 / (m sqrt(m+1)); integral from x is 2 atanh(1/sqrt(x+1))
      m.nonpositive.tail = decreasing_tail<Real>(
          N, [](Real x) { return 1 / (x * std::sqrt(x + 1)); },
          [](Real x) {
            return -1 / (x * x * std::sqrt(x + 1)) - 1 / (2 * x * std::pow(x + 1, Real(1.5)));
          },
          [](Real x) { return 2 * std::atanh(1 / std::sqrt(x + 1)); });
      break;
    case Kind::PowerLaw: {
      const auto& p = fam.power_params();
      const Real e = 2 * p.control_decay;
      if (!(e > 1)) {
        m.divergent = true;
        break;
      }
      const Real c = p.control_scale * p.control_scale / p.decay;
      m.positive.tail = decreasing_tail<Real>(
          N, [&](Real x) { return c * std::pow(x, -e); }, [&](Real x) { return -e * c * std::pow(x, -e - 1); },
          [&](Real x) { return c * std::pow(x, 1 - e) / (e - 1); });
      break;
    }
    case Kind::Explicit: {
      std::vector<Real> rest;
      for (ModeIndex k = sys.window.last + 1; k <= fam.window().last; ++k)
        rest.push_back(std::norm(fam.control(k)) / std::abs(fam.eigenvalue(k).real()));
      const Real r = pairwise_sum(rest);
      m.positive.tail = {r, r, r};
      break;
    }
  }
  return m;
}

/// (1 - e^{-1})^2 n^{1/4}: lower bound on sup_t ||Phi_t||^2 over unit inputs, attained by u_n at t = n.
template <typename Real>
[[nodiscard]] Real example1_divergence_witness(ModeIndex n) {
  if (n < 1 || !is_in_I1(n)) throw InvalidArgument("example1_divergence_witness: n must be a perfect square");
  const Real g = -std::expm1(Real(-1));
  return g * g * std::pow(static_cast<Real>(n), Real(0.25));
}

struct GridSpec {
  double re_min = 1e-6;
  double re_max = 1e2;
  int re_points = 60;
  int im_points = 400;
  double im_margin = 10;
  bool include_mirrors = true;
};

enum class Verdict { Admissible, NotAdmissible, Inconclusive };

[[nodiscard]] inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Admissible: return "admissible";
    case Verdict::NotAdmissible: return "not-admissible";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

template <typename Real>
struct WitnessEntry {
  ModeIndex n = 0;
  Complex<Real> z;
  Real value = 0;        // Re z * S(z) over the window
  Real lower_bound = 0;  // single-mode contribution of mode n, Re z |b_n|^2 / |z - lambda_n|^2
};

template <typename Real>
struct GridRow {
  Real re_z = 0;
  Real im_z = 0;
  Real S = 0;
  Real rezS = 0;
  Real tail = 0;
  ProbeSource source = ProbeSource::Grid;
};

template <typename Real>
struct CriterionReport {
  Real sup_estimate = 0;
  ProbePoint<Real> witness{Complex<Real>(1, 0)};
  MBound<Real> m;
  std::optional<Real> M_bound;  // certified upper bound on M; nullopt when M diverges
  Real tail_bound_at_witness = 0;  // Re z * (tail of S) at the witness
  Verdict verdict = Verdict::Inconclusive;
  std::vector<WitnessEntry<Real>> witness_sequence;
  std::vector<GridRow<Real>> rows;
};

struct SearchOptions {
  double divergence_threshold = 1e3;
  bool keep_rows = true;
};

/// Evaluates Re z * S(z) on the grid, on mirrored eigenvalues and on extra probes, then decides.
/// "admissible" needs a finite certified M; "not-admissible" needs the witness sequence to end in a
/// strictly increasing run of at least three entries (all of them if fewer) whose last value exceeds
/// the divergence threshold.
template <typename Real>
[[nodiscard]] CriterionReport<Real> sup_search(const TruncatedSystem<Real>& sys, const GridSpec& grid,
                                               const std::vector<ProbePoint<Real>>& extra_probes = {},
                                               const SearchOptions& opts = {}) {
  if (grid.re_points < 1 || grid.im_points < 1 || !(grid.re_min > 0) || !(grid.re_max >= grid.re_min))
    throw InvalidArgument("sup_search: empty or invalid grid");
  if (sys.size() == 0) throw InvalidArgument("sup_search: empty system");

  std::vector<ProbePoint<Real>> probes;
  Real im_lo = sys.lambda[0].imag(), im_hi = im_lo;
  for (Eigen::Index i = 0; i < sys.size(); ++i) {
    im_lo = std::min(im_lo, sys.lambda[i].imag());
    im_hi = std::max(im_hi, sys.lambda[i].imag());
  }
  im_lo -= static_cast<Real>(grid.im_margin);
  im_hi += static_cast<Real>(grid.im_margin);
  const Real log_lo = std::log(static_cast<Real>(grid.re_min));
  const Real log_hi = std::log(static_cast<Real>(grid.re_max));
  for (int a = 0; a < grid.re_points; ++a) {
    const Real re = grid.re_points == 1 ? static_cast<Real>(grid.re_min)
                                        : std::exp(log_lo + (log_hi - log_lo) * a / (grid.re_points - 1));
    for (int c = 0; c < grid.im_points; ++c) {
      const Real im = grid.im_points == 1 ? (im_lo + im_hi) / 2 : im_lo + (im_hi - im_lo) * c / (grid.im_points - 1);
      probes.emplace_back(Complex<Real>(re, im), ProbeSource::Grid);
    }
  }
  if (grid.include_mirrors)
    for (Eigen::Index i = 0; i < sys.size(); ++i)
      probes.emplace_back(Complex<Real>(std::abs(sys.lambda[i].real()), sys.lambda[i].imag()),
                          ProbeSource::EigenvalueMirror, sys.index_at(i));
  for (const auto& p : extra_probes) probes.push_back(p);

  CriterionReport<Real> rep;
  rep.sup_estimate = -1;
  std::vector<Real> scaled_at(probes.size());
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const CriterionValue<Real> cv = criterion_sum(sys, probes[j]);
    scaled_at[j] = cv.scaled;
    const Real x = probes[j].z.real();
    if (cv.scaled > rep.sup_estimate) {
      rep.sup_estimate = cv.scaled;
      rep.witness = probes[j];
      rep.tail_bound_at_witness = x * cv.tail_bound;
    }
    if (opts.keep_rows)
      rep.rows.push_back({x, probes[j].z.imag(), cv.value, cv.scaled, cv.tail_bound, probes[j].source});
  }

  auto single_term = [&](ModeIndex n, Complex<Real> z) {
    const Eigen::Index i = sys.position_of(n);
    const Real r = std::sqrt(z.real()) * std::abs(sys.b[i]) / std::abs(z - sys.lambda[i]);
    return r * r;
  };

  bool explicit_probes = false;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    if (probes[j].source != ProbeSource::Example2Probe) continue;
    explicit_probes = true;
    const ModeIndex n = probes[j].n;
    const Real lb = sys.window.contains(n) ? single_term(n, probes[j].z) : Real(0);
    rep.witness_sequence.push_back({n, probes[j].z, scaled_at[j], lb});
  }
  if (!explicit_probes && grid.include_mirrors) {
    // record lower bound |b_k|^2 / (4 |Re lambda_k|) per dyadic block of |k|
    const std::size_t mirror_begin = static_cast<std::size_t>(grid.re_points) * grid.im_points;
    std::map<int, std::pair<std::size_t, Real>> best;  // block -> (probe index, lower bound)
    for (std::size_t j = mirror_begin; j < mirror_begin + static_cast<std::size_t>(sys.size()); ++j) {
      const ModeIndex k = probes[j].n;
      if (k == 0) continue;
      const int block = std::bit_width(static_cast<std::uint64_t>(std::abs(k))) - 1;
      const Real lb = single_term(k, probes[j].z);
      auto [it, inserted] = best.try_emplace(block, j, lb);
      if (!inserted && lb > it->second.second) it->second = {j, lb};
    }
    for (const auto& [block, entry] : best) {
      const std::size_t j = entry.first;
      rep.witness_sequence.push_back({probes[j].n, probes[j].z, scaled_at[j], entry.second});
    }
  }

  rep.m = m_bound(sys);
  if (!rep.m.divergent) rep.M_bound = rep.m.certified_upper();

  // trailing strictly increasing run; the head of the sequence may dip before the blow-up starts
  const std::size_t len = rep.witness_sequence.size();
  std::size_t run = len == 0 ? 0 : 1;
  while (run < len && rep.witness_sequence[len - run].value > rep.witness_sequence[len - run - 1].value) ++run;
  const bool increasing = len >= 2 && run >= std::min<std::size_t>(3, len);

  if (rep.M_bound) {
    const Real limit = *rep.M_bound / 2 + rep.tail_bound_at_witness;
    rep.verdict = rep.sup_estimate <= limit * (1 + Real(1e-9)) ? Verdict::Admissible : Verdict::Inconclusive;
  } else if (increasing && rep.witness_sequence.back().value > static_cast<Real>(opts.divergence_threshold)) {
    rep.verdict = Verdict::NotAdmissible;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  return rep;
}

}  // namespace admlab

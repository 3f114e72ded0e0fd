#pragma once

// Diagonal generators on l^2, the two example families and their perturbation,
// truncation with analytic tail information.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "admlab/numerics.hpp"
#include "admlab/types.hpp"

namespace admlab {

enum class FamilyTag { Example1A0, Example1A, Example2A, Example2APrime, Synthetic };

[[nodiscard]] inline std::string_view to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::Example1A0: return "example1-A0";
    case FamilyTag::Example1A: return "example1-A";
    case FamilyTag::Example2A: return "example2-A";
    case FamilyTag::Example2APrime: return "example2-Aprime";
    case FamilyTag::Synthetic: return "synthetic";
  }
  return "unknown";
}

/// Integer square root, floor(sqrt(n)), by Newton iteration on integers.
[[nodiscard]] constexpr std::uint64_t isqrt(std::uint64_t n) {
  if (n < 2) return n;
  std::uint64_t x = n;
  std::uint64_t y = (x + 1) / 2;
  while (y < x) {
    x = y;
    y = (x + n / x) / 2;
  }
  return x;
}

/// Membership in I_1 = { l^2 : l >= 1 }.
[[nodiscard]] constexpr bool is_in_I1(ModeIndex k) {
  if (k <= 0) throw InvalidArgument("is_in_I1: index must be positive");
  const auto r = isqrt(static_cast<std::uint64_t>(k));
  return r * r == static_cast<std::uint64_t>(k);
}

/// Imaginary parts beta_k of the example-1 eigenvalues.
template <typename Real>
struct BetaProfile {
  enum class Kind { Linear, Power, Table };

  Kind kind = Kind::Linear;
  Real scale = 1;
  Real exponent = 1;
  std::vector<Real> table;  // table[k-1] = beta_k

  static BetaProfile linear(Real scale = 1) { return {Kind::Linear, scale, 1, {}}; }
  static BetaProfile power(Real scale, Real exponent) { return {Kind::Power, scale, exponent, {}}; }
  static BetaProfile from_table(std::vector<Real> values) {
    return {Kind::Table, 1, 1, std::move(values)};
  }

  [[nodiscard]] Real operator()(ModeIndex k) const {
    switch (kind) {
      case Kind::Linear: return scale * static_cast<Real>(k);
      case Kind::Power: return scale * std::pow(static_cast<Real>(k), exponent);
      case Kind::Table: return table.at(static_cast<std::size_t>(k - 1));
    }
    return 0;
  }

  /// Closed-form growth law beta_k = s * k^p when one exists.
  [[nodiscard]] std::optional<std::pair<Real, Real>> growth_law() const {
    if (kind == Kind::Linear) return std::pair{scale, Real(1)};
    if (kind == Kind::Power) return std::pair{scale, exponent};
    return std::nullopt;
  }

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::Linear: return "linear";
      case Kind::Power: return "power";
      case Kind::Table: return "table";
    }
    return "unknown";
  }

  /// Throws unless beta is strictly increasing on 1..N and (for closed forms) unbounded.
  void validate(ModeIndex N) const {
    if (kind == Kind::Linear && !(scale > 0))
      throw InvalidArgument("beta profile: linear scale must be positive");
    if (kind == Kind::Power && !(scale > 0 && exponent > 0))
      throw InvalidArgument("beta profile: power law needs positive scale and exponent");
    if (kind == Kind::Table && static_cast<ModeIndex>(table.size()) < N)
      throw InvalidArgument("beta profile: table shorter than the window");
    for (ModeIndex k = 1; k < N; ++k) {
      if (!((*this)(k + 1) > (*this)(k)))
        throw InvalidArgument("beta profile: must be strictly increasing (fails at k=" +
                              std::to_string(k) + ")");
    }
  }
};

/// Synthetic power-law family on k >= 1: lambda_k = -a + i s k^p, b_k = c k^{-q}.
template <typename Real>
struct PowerLawParams {
  Real decay = 1;        // a > 0
  Real freq_scale = 1;   // s > 0
  Real freq_power = 1;   // p > 0
  Real control_scale = 1;  // c
  Real control_decay = 1;  // q >= 0
};

/// Diagonal generator with scalar control: lambda_k on a materialized window, b_k alongside.
/// Values come from closed-form generators; only the explicit synthetic kind stores data.
template <typename Real>
class DiagonalSystem {
 public:
  using C = Complex<Real>;

  enum class Kind { Example1, Example2A, Example2APrime, PowerLaw, Explicit };

  static DiagonalSystem example1(ModeIndex N, BetaProfile<Real> beta = BetaProfile<Real>::linear()) {
    if (N < 1) throw InvalidArgument("example1: N must be >= 1");
    beta.validate(N);
    DiagonalSystem s(Kind::Example1, FamilyTag::Example1A0, IndexWindow{1, N});
    s.beta_ = std::move(beta);
    return s;
  }

  static DiagonalSystem example2_A(ModeIndex N) {
    if (N < 1) throw InvalidArgument("example2: N must be >= 1");
    return DiagonalSystem(Kind::Example2A, FamilyTag::Example2A, IndexWindow{-N, N});
  }

  /// Rejects windows where exp(-N) is no longer a normal number (Re lambda'_N would lose its sign).
  static DiagonalSystem example2_A_prime(ModeIndex N) {
    if (N < 1) throw InvalidArgument("example2: N must be >= 1");
    if (N > max_normal_exp_decay<Real>())
      throw InvalidArgument("example2 A': exp(-N) underflows for N=" + std::to_string(N) +
                            " (max " + std::to_string(max_normal_exp_decay<Real>()) + ")");
    return DiagonalSystem(Kind::Example2APrime, FamilyTag::Example2APrime, IndexWindow{-N, N});
  }

  static DiagonalSystem power_law(ModeIndex N, PowerLawParams<Real> p) {
    if (N < 1) throw InvalidArgument("power_law: N must be >= 1");
    if (!(p.decay > 0 && p.freq_scale > 0 && p.freq_power > 0 && p.control_decay >= 0))
      throw InvalidArgument("power_law: need a > 0, s > 0, p > 0, q >= 0");
    DiagonalSystem s(Kind::PowerLaw, FamilyTag::Synthetic, IndexWindow{1, N});
    s.power_ = p;
    return s;
  }

  /// Finite system from explicit data; indices first, first+1, ...
  static DiagonalSystem explicit_modes(std::vector<C> lambda, std::vector<C> b, ModeIndex first = 1) {
    if (lambda.empty() || lambda.size() != b.size())
      throw InvalidArgument("explicit_modes: lambda and b must be nonempty and equally long");
    for (const C& l : lambda)
      if (!(l.real() < 0)) throw InvalidArgument("explicit_modes: every eigenvalue needs Re < 0");
    std::vector<std::pair<Real, Real>> keys;
    keys.reserve(lambda.size());
    for (const C& l : lambda) keys.emplace_back(l.real(), l.imag());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw InvalidArgument("explicit_modes: eigenvalues must be pairwise distinct");
    DiagonalSystem s(Kind::Explicit, FamilyTag::Synthetic,
                     IndexWindow{first, first + static_cast<ModeIndex>(lambda.size()) - 1});
    s.explicit_ = std::make_shared<const ExplicitData>(ExplicitData{std::move(lambda), std::move(b)});
    return s;
  }

  [[nodiscard]] C eigenvalue(ModeIndex k) const {
    check_index(k);
    return generate_eigenvalue(k);
  }

  [[nodiscard]] C control(ModeIndex k) const {
    check_index(k);
    return generate_control(k);
  }

  /// Generator evaluated anywhere in the family's index set, inside or beyond the window.
  [[nodiscard]] C generate_eigenvalue(ModeIndex k) const {
    check_family_index(k);
    const Real kr = static_cast<Real>(k);
    switch (kind_) {
      case Kind::Example1: return {-1 / kr, beta_(k)};
      case Kind::Example2A:
        if (k > 0) return {-1 / std::sqrt(kr), kr};
        return {-std::sqrt(static_cast<Real>(-k + 1)), 0};
      case Kind::Example2APrime:
        if (k > 0) return {-std::exp(-kr), kr};
        return {-std::sqrt(static_cast<Real>(-k + 1)), 0};
      case Kind::PowerLaw: return {-power_.decay, power_.freq_scale * std::pow(kr, power_.freq_power)};
      case Kind::Explicit: return explicit_->lambda[static_cast<std::size_t>(window_.offset(k))];
    }
    return {};
  }

  [[nodiscard]] C generate_control(ModeIndex k) const {
    check_family_index(k);
    const Real kr = static_cast<Real>(k);
    switch (kind_) {
      case Kind::Example1:
        if (is_in_I1(k)) return {std::pow(kr, Real(-3) / 8), 0};
        return {1 / kr, 0};
      case Kind::Example2A:
      case Kind::Example2APrime:
        if (k > 0) return {1 / kr, 0};
        if (k == 0) return {0, 0};
        return {1 / std::sqrt(-kr), 0};
      case Kind::PowerLaw: return {power_.control_scale * std::pow(kr, -power_.control_decay), 0};
      case Kind::Explicit: return explicit_->b[static_cast<std::size_t>(window_.offset(k))];
    }
    return {};
  }

  [[nodiscard]] const IndexWindow& window() const { return window_; }
  [[nodiscard]] FamilyTag family_tag() const { return tag_; }
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const BetaProfile<Real>& beta() const { return beta_; }
  [[nodiscard]] const PowerLawParams<Real>& power_params() const { return power_; }

  /// Index set is Z (windows [-N, N]) rather than N (windows [1, N]).
  [[nodiscard]] bool integer_indexed() const {
    return kind_ == Kind::Example2A || kind_ == Kind::Example2APrime;
  }
  /// The family is infinite; omitted modes exist beyond any window.
  [[nodiscard]] bool infinite_family() const { return kind_ != Kind::Explicit; }
  /// |lambda_k| -> infinity along the family (compact resolvent).
  [[nodiscard]] bool modulus_unbounded() const { return infinite_family(); }
  /// sup Re lambda_k = 0 over the whole family although every Re lambda_k < 0.
  [[nodiscard]] bool abscissa_zero() const {
    return kind_ == Kind::Example1 || kind_ == Kind::Example2A || kind_ == Kind::Example2APrime;
  }

  /// Window used by truncate(N).
  [[nodiscard]] IndexWindow window_for(ModeIndex N) const {
    if (integer_indexed()) return {-N, N};
    return {window_.first, window_.first + N - 1};
  }

  /// sum over the materialized window of |b_k|^2 / (1 + |lambda_k|^2).
  [[nodiscard]] Real x_minus1_weighted_sum() const {
    std::vector<Real> terms;
    terms.reserve(static_cast<std::size_t>(window_.size()));
    for (ModeIndex k = window_.first; k <= window_.last; ++k)
      terms.push_back(std::norm(control(k)) / (1 + std::norm(eigenvalue(k))));
    return pairwise_sum(terms);
  }

 private:
  struct ExplicitData {
    std::vector<C> lambda;
    std::vector<C> b;
  };

  DiagonalSystem(Kind kind, FamilyTag tag, IndexWindow w) : kind_(kind), tag_(tag), window_(w) {}

  void check_index(ModeIndex k) const {
    if (!window_.contains(k))
      throw InvalidArgument("mode index " + std::to_string(k) + " outside materialized window [" +
                            std::to_string(window_.first) + ", " + std::to_string(window_.last) + "]");
  }

  void check_family_index(ModeIndex k) const {
    if (kind_ == Kind::Explicit) return check_index(k);
    if (!integer_indexed() && k < 1)
      throw InvalidArgument("mode index " + std::to_string(k) + " outside the index set {1, 2, ...}");
  }

  Kind kind_;
  FamilyTag tag_;
  IndexWindow window_;
  BetaProfile<Real> beta_{};
  PowerLawParams<Real> power_{};
  std::shared_ptr<const ExplicitData> explicit_;
};

/// Finite restriction of a DiagonalSystem plus what is known about the omitted modes.
template <typename Real>
struct TruncatedSystem {
  ComplexVector<Real> lambda;
  ComplexVector<Real> b;
  IndexWindow window;
  std::shared_ptr<const DiagonalSystem<Real>> origin;
  Real tail_sup_re = -std::numeric_limits<Real>::infinity();
  std::optional<Real> tail_b_sq;      // nullopt: the omitted sum diverges
  std::optional<Real> tail_weighted;  // X_{-1} weighted tail, nullopt: diverges

  [[nodiscard]] Eigen::Index size() const { return lambda.size(); }
  [[nodiscard]] ModeIndex index_at(Eigen::Index i) const { return window.first + static_cast<ModeIndex>(i); }
  [[nodiscard]] Eigen::Index position_of(ModeIndex k) const {
    if (!window.contains(k)) throw InvalidArgument("mode " + std::to_string(k) + " not in truncation window");
    return static_cast<Eigen::Index>(window.offset(k));
  }
};

namespace detail {

/// Upper bound on sum_{k > N} k^{-e} for e > 1.
template <typename Real>
Real power_tail(Real N, Real e) {
  return std::pow(N, 1 - e) / (e - 1);
}

template <typename Real>
std::optional<Real> tail_b_sq(const DiagonalSystem<Real>& sys, const IndexWindow& w) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  const Real N = static_cast<Real>(w.last);
  switch (sys.kind()) {
    case Kind::Example1: {
      // non-squares: sum_{k>N} k^-2 <= 1/N; squares l^2 > N: sum_{l>=L} l^{-3/2} <= L^{-3/2} + 2/sqrt(L)
      const Real L = static_cast<Real>(isqrt(static_cast<std::uint64_t>(w.last)) + 1);
      return 1 / N + std::pow(L, Real(-1.5)) + 2 / std::sqrt(L);
    }
    case Kind::Example2A:
    case Kind::Example2APrime: return std::nullopt;  // sum over k<0 of 1/|k| diverges
    case Kind::PowerLaw: {
      const auto& p = sys.power_params();
      const Real e = 2 * p.control_decay;
      if (!(e > 1)) return std::nullopt;
      return p.control_scale * p.control_scale * power_tail(N, e);
    }
    case Kind::Explicit: {
      std::vector<Real> terms;
      for (ModeIndex k = w.last + 1; k <= sys.window().last; ++k) terms.push_back(std::norm(sys.control(k)));
      return pairwise_sum(terms);
    }
  }
  return std::nullopt;
}

template <typename Real>
std::optional<Real> tail_weighted(const DiagonalSystem<Real>& sys, const IndexWindow& w) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  const Real N = static_cast<Real>(w.last);
  switch (sys.kind()) {
    case Kind::Example1: return tail_b_sq(sys, w);
    case Kind::Example2A:
    case Kind::Example2APrime:
      // k>N: 1/(k^2 (1+k^2)) <= k^-4; k<-N: (1/m)/(m+2) <= 1/(m(m+1)), telescoping
      return power_tail(N, Real(4)) + 1 / (N + 1);
    case Kind::PowerLaw: {
      const auto& p = sys.power_params();
      const Real e = 2 * p.control_decay + 2 * p.freq_power;
      if (!(e > 1)) return std::nullopt;
      const Real c2 = p.control_scale * p.control_scale;
      return c2 / (p.freq_scale * p.freq_scale) * power_tail(N, e);
    }
    case Kind::Explicit: {
      std::vector<Real> terms;
      for (ModeIndex k = w.last + 1; k <= sys.window().last; ++k)
        terms.push_back(std::norm(sys.control(k)) / (1 + std::norm(sys.eigenvalue(k))));
      return pairwise_sum(terms);
    }
  }
  return std::nullopt;
}

template <typename Real>
Real tail_sup_re(const DiagonalSystem<Real>& sys, const IndexWindow& w) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  switch (sys.kind()) {
    case Kind::Example1:
    case Kind::Example2A:
    case Kind::Example2APrime: return 0;  // supremum, not attained
    case Kind::PowerLaw: return -sys.power_params().decay;
    case Kind::Explicit: {
      Real s = -std::numeric_limits<Real>::infinity();
      for (ModeIndex k = w.last + 1; k <= sys.window().last; ++k) s = std::max(s, sys.eigenvalue(k).real());
      return s;
    }
  }
  return 0;
}

}  // namespace detail

/// Restriction to the first N modes (or to [-N, N] for Z-indexed families).
template <typename Real>
[[nodiscard]] TruncatedSystem<Real> truncate(std::shared_ptr<const DiagonalSystem<Real>> sys, ModeIndex N) {
  if (!sys) throw InvalidArgument("truncate: null system");
  const IndexWindow w = sys->window_for(N);
  if (N < 1 || w.first < sys->window().first || w.last > sys->window().last)
    throw InvalidArgument("truncate: N=" + std::to_string(N) + " exceeds the materialized window");
  TruncatedSystem<Real> t;
  t.window = w;
  t.lambda.resize(w.size());
  t.b.resize(w.size());
  for (ModeIndex k = w.first; k <= w.last; ++k) {
    t.lambda[w.offset(k)] = sys->eigenvalue(k);
    t.b[w.offset(k)] = sys->control(k);
  }
  t.tail_sup_re = detail::tail_sup_re(*sys, w);
  t.tail_b_sq = detail::tail_b_sq(*sys, w);
  t.tail_weighted = detail::tail_weighted(*sys, w);
  t.origin = std::move(sys);
  return t;
}

/// Full materialized window.
template <typename Real>
[[nodiscard]] TruncatedSystem<Real> truncate(std::shared_ptr<const DiagonalSystem<Real>> sys) {
  const IndexWindow w = sys->window();
  const ModeIndex N = sys->integer_indexed() ? w.last : w.size();
  return truncate(std::move(sys), N);
}

template <typename Real>
[[nodiscard]] TruncatedSystem<Real> truncate(const DiagonalSystem<Real>& sys, ModeIndex N) {
  return truncate(std::make_shared<const DiagonalSystem<Real>>(sys), N);
}

template <typename Real>
[[nodiscard]] TruncatedSystem<Real> truncate(const DiagonalSystem<Real>& sys) {
  return truncate(std::make_shared<const DiagonalSystem<Real>>(sys));
}

enum class ControlClass { Bounded, Unbounded, InadmissibleForXMinus1 };

[[nodiscard]] inline std::string_view to_string(ControlClass c) {
  switch (c) {
    case ControlClass::Bounded: return "bounded";
    case ControlClass::Unbounded: return "unbounded";
    case ControlClass::InadmissibleForXMinus1: return "inadmissible-for-X-1";
  }
  return "unknown";
}

template <typename Real>
struct ControlClassification {
  ControlClass cls = ControlClass::Bounded;
  Real window_b_sq = 0;
  std::optional<Real> tail_b_sq;
  Real window_weighted = 0;
  std::optional<Real> tail_weighted;
};

/// Bounded iff sum |b_k|^2 converges; unbounded iff only the X_{-1} weighted sum does.
template <typename Real>
[[nodiscard]] ControlClassification<Real> classify_control(const DiagonalSystem<Real>& sys) {
  const IndexWindow& w = sys.window();
  const ModeIndex N = sys.integer_indexed() ? w.last : w.size();
  const IndexWindow tw = sys.window_for(N);
  ControlClassification<Real> r;
  std::vector<Real> sq;
  for (ModeIndex k = w.first; k <= w.last; ++k) sq.push_back(std::norm(sys.control(k)));
  r.window_b_sq = pairwise_sum(sq);
  r.window_weighted = sys.x_minus1_weighted_sum();
  r.tail_b_sq = detail::tail_b_sq(sys, tw);
  r.tail_weighted = detail::tail_weighted(sys, tw);
  if (r.tail_b_sq)
    r.cls = ControlClass::Bounded;
  else if (r.tail_weighted)
    r.cls = ControlClass::Unbounded;
  else
    r.cls = ControlClass::InadmissibleForXMinus1;
  return r;
}

/// Diagonal perturbation q_k = lambda'_k - lambda_k between two generators on the same window.
template <typename Real>
struct PerturbationSequence {
  IndexWindow window;
  ComplexVector<Real> entries;
  std::optional<std::int64_t> declared_rank;  // nullopt: infinite
  Real sup_abs = 0;
  // (K, sup_{|k| > K} |q_k|) for K = 0 .. max|k|; entries beyond the window come from the family law.
  std::vector<std::pair<ModeIndex, Real>> tail_sup;

  [[nodiscard]] Complex<Real> at(ModeIndex k) const { return entries[static_cast<Eigen::Index>(window.offset(k))]; }

  /// ||Q - Q_K|| where Q_K keeps the modes with |k| <= K.
  [[nodiscard]] Real finite_rank_error(ModeIndex K) const {
    for (const auto& [k, s] : tail_sup)
      if (k == K) return s;
    throw InvalidArgument("finite_rank_error: K outside the diagnostic range");
  }
};

template <typename Real>
[[nodiscard]] PerturbationSequence<Real> perturbation_between(const DiagonalSystem<Real>& A,
                                                              const DiagonalSystem<Real>& Aprime) {
  using Kind = typename DiagonalSystem<Real>::Kind;
  if (!(A.window() == Aprime.window())) throw WindowMismatch("perturbation_between: windows differ");
  const IndexWindow w = A.window();
  PerturbationSequence<Real> q;
  q.window = w;
  q.entries.resize(w.size());
  std::int64_t nonzero = 0;
  for (ModeIndex k = w.first; k <= w.last; ++k) {
    const Complex<Real> d = Aprime.eigenvalue(k) - A.eigenvalue(k);
    q.entries[w.offset(k)] = d;
    if (d != Complex<Real>(0)) ++nonzero;
    q.sup_abs = std::max(q.sup_abs, std::abs(d));
  }

  // Closed-form law beyond the window: sup_{k > K} (k^{-1/2} - e^{-k}) = (K+1)^{-1/2} - e^{-(K+1)}.
  const bool ex2_pair = (A.kind() == Kind::Example2A && Aprime.kind() == Kind::Example2APrime) ||
                        (A.kind() == Kind::Example2APrime && Aprime.kind() == Kind::Example2A);
  Real beyond = 0;
  if (ex2_pair) {
    const Real K1 = static_cast<Real>(w.last + 1);
    beyond = 1 / std::sqrt(K1) - std::exp(-K1);
    q.declared_rank = std::nullopt;
  } else if (A.kind() == Kind::Explicit && Aprime.kind() == Kind::Explicit) {
    q.declared_rank = nonzero;
  } else if (A.kind() == Aprime.kind() && nonzero == 0) {
    q.declared_rank = 0;
  } else {
    q.declared_rank = std::nullopt;
    beyond = std::numeric_limits<Real>::quiet_NaN();
  }

  const ModeIndex kmax = std::max(std::abs(w.first), std::abs(w.last));
  std::vector<Real> by_abs(static_cast<std::size_t>(kmax) + 1, Real(0));
  for (ModeIndex k = w.first; k <= w.last; ++k) {
    auto& slot = by_abs[static_cast<std::size_t>(std::abs(k))];
    slot = std::max(slot, std::abs(q.entries[w.offset(k)]));
  }
  q.tail_sup.resize(static_cast<std::size_t>(kmax) + 1);
  Real running = beyond;
  for (ModeIndex K = kmax; K >= 0; --K) {
    q.tail_sup[static_cast<std::size_t>(K)] = {K, running};
    const Real v = by_abs[static_cast<std::size_t>(K)];
    if (!(running >= v)) running = std::isnan(running) ? running : v;
  }
  return q;
}

}  // namespace admlab

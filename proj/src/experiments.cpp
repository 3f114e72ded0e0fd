#include "admlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "admlab/feedback.hpp"
#include "admlab/spectral_core.hpp"

namespace admlab {

namespace {

using json = nlohmann::json;
using C = std::complex<double>;

const std::map<std::string, Experiment, std::less<>>& experiment_table() {
  static const std::map<std::string, Experiment, std::less<>> t{
      {"ex1-divergence", Experiment::Ex1Divergence},     {"ex1-feedback", Experiment::Ex1Feedback},
      {"ex2-criterion", Experiment::Ex2Criterion},       {"ex2-divergence", Experiment::Ex2Divergence},
      {"ex2-perturbation", Experiment::Ex2Perturbation}, {"criterion-scan", Experiment::CriterionScan},
      {"stability-report", Experiment::StabilityReport}, {"selftest", Experiment::Selftest},
  };
  return t;
}

double one_minus_inv_e_sq() {
  const double g = -std::expm1(-1.0);
  return g * g;
}

/// Named pass/fail checks accumulated into the result document.
class CheckList {
 public:
  void add(std::string name, bool passed, double measured, double threshold, std::string relation) {
    all_ = all_ && passed;
    items_.push_back({{"name", std::move(name)},
                      {"passed", passed},
                      {"measured", measured},
                      {"threshold", threshold},
                      {"relation", std::move(relation)}});
  }
  void at_most(std::string name, double measured, double threshold) {
    add(std::move(name), measured <= threshold, measured, threshold, "<=");
  }
  void at_least(std::string name, double measured, double threshold) {
    add(std::move(name), measured >= threshold, measured, threshold, ">=");
  }
  [[nodiscard]] bool all() const { return all_; }
  [[nodiscard]] json to_json() const { return items_; }

 private:
  json items_ = json::array();
  bool all_ = true;
};

std::shared_ptr<const DiagonalSystem<double>> make_family(const std::string& family, std::int64_t N,
                                                          const BetaProfile<double>& beta) {
  using S = DiagonalSystem<double>;
  if (family == "example1-A0") return std::make_shared<const S>(S::example1(N, beta));
  if (family == "example2-A") return std::make_shared<const S>(S::example2_A(N));
  if (family == "example2-Aprime") return std::make_shared<const S>(S::example2_A_prime(N));
  if (family == "power-law") return std::make_shared<const S>(S::power_law(N, PowerLawParams<double>{}));
  throw InvalidArgument("unknown family '" + family + "'");
}

// ---------------------------------------------------------------------------------------------

ExperimentResult run_ex1_divergence(const RunConfig& cfg) {
  const auto beta = cfg.beta();
  auto sys = std::make_shared<const DiagonalSystem<double>>(DiagonalSystem<double>::example1(cfg.N, beta));
  const TruncatedSystem<double> ts = truncate(sys);
  const double g2 = one_minus_inv_e_sq();

  Table table{"ex1_divergence",
              {"n", "n_quarter", "bound", "measured_sq", "single_mode_sq", "identity_rel_err", "grid_sup_sq",
               "grid_argmax"},
              {}};
  CheckList checks;
  double prev = -1;
  bool increasing = true;
  for (std::int64_t n : cfg.n_list) {
    const InputSignal<double> u = make_un_signal(n, beta(n));
    const double nr = static_cast<double>(n);
    const C integral = mode_integral(sys->eigenvalue(n), u, nr);
    const double identity = nr * g2;
    const double rel = std::abs(std::norm(integral) - identity) / identity;
    const double measured = phi_state(ts, u, nr).squared_norm();
    const double single = std::norm(sys->control(n)) * std::norm(integral);
    const double bound = example1_divergence_witness<double>(n);
    const SupNorm<double> sup = phi_sup_norm(ts, u, default_time_grid(u, 2 * nr, 24));
    table.add_row({n, std::pow(nr, 0.25), bound, measured, single, rel, sup.value * sup.value, sup.argmax});
    checks.at_least("measured>=bound n=" + std::to_string(n), measured, bound);
    checks.at_most("identity n=" + std::to_string(n), rel, 1e-10);
    increasing = increasing && measured > prev;
    prev = measured;
  }
  checks.add("measured strictly increasing", increasing, increasing ? 1 : 0, 1, "==");

  ExperimentResult r;
  r.document["classification"] = std::string(to_string(classify_control(*sys).cls));
  r.document["verdicts"] = {{"lower_bounds_hold", checks.all()}, {"divergence_trend", increasing}};
  r.document["note"] =
      "lower bounds on sup over unit-norm inputs, realized by the explicit family u_n at t = n";
  r.document["checks"] = checks.to_json();
  r.checks_passed = checks.all();
  r.tables.push_back(std::move(table));
  return r;
}

ExperimentResult run_ex1_feedback(const RunConfig& cfg) {
  const auto beta = cfg.beta();
  const TruncatedSystem<double> ts = truncate(DiagonalSystem<double>::example1(cfg.N, beta));
  const FeedbackSystem<double> fs = assemble_feedback(ts);
  const FeedbackPhiEvaluator<double> phi(fs);
  const CollocatedHypotheses hyp = collocated_hypotheses_check(ts, ts.b);

  Table table{"ex1_feedback", {"signal", "kind", "n", "l2_norm_sq", "t_argmax", "max_phi_sq", "bound"}, {}};
  double worst = 0;
  auto evaluate = [&](const std::string& id, const std::string& kind, std::int64_t n, const InputSignal<double>& u) {
    std::vector<double> grid = default_time_grid(u, u.support_end(), 16, u.support_end() * 1e-3);
    double best = 0, arg = grid.front();
    for (double t : grid) {
      const double v = phi(u, t).squaredNorm();
      if (v > best) best = v, arg = t;
    }
    const double bound = 0.5 * u.l2_norm_squared();
    worst = std::max(worst, best - bound);
    table.add_row({id, kind, n, u.l2_norm_squared(), arg, best, bound});
  };
  for (std::int64_t n : cfg.n_list)
    evaluate("u" + std::to_string(n), "u_n", n, make_un_signal(n, beta(n)));
  std::mt19937_64 rng(cfg.seed);
  const double omega_max = ts.lambda.imag().cwiseAbs().maxCoeff();
  for (int s = 0; s < cfg.signals; ++s)
    evaluate("r" + std::to_string(s), "random", 0, random_unit_signal(rng, omega_max));

  CheckList checks;
  checks.at_most("max(||phi||^2 - ||u||^2/2)", worst, cfg.feedback_tolerance);
  checks.add("collocated hypotheses", hyp.all(), hyp.all() ? 1 : 0, 1, "==");

  ExperimentResult r;
  r.document["hypotheses"] = {{"distinct_eigenvalues", hyp.distinct_eigenvalues},
                              {"nonzero_control", hyp.nonzero_control},
                              {"dissipative_diagonal", hyp.dissipative_diagonal},
                              {"modulus_unbounded", hyp.modulus_unbounded}};
  r.document["modal_route"] = phi.modal();
  r.document["max_excess_over_half_l2"] = worst;
  r.document["verdicts"] = {{"infinite_time_bound_holds", worst <= cfg.feedback_tolerance}};
  r.document["checks"] = checks.to_json();
  r.checks_passed = checks.all();
  r.tables.push_back(std::move(table));
  return r;
}

ExperimentResult run_criterion(const RunConfig& cfg, const std::string& family, const std::string& stem,
                               const std::vector<ProbePoint<double>>& probes) {
  const auto sys = make_family(family, cfg.N, cfg.beta());
  const TruncatedSystem<double> ts = truncate(sys);
  const CriterionReport<double> rep = sup_search(ts, cfg.grid, probes, {cfg.divergence_threshold, true});
  const ControlClassification<double> cls = classify_control(*sys);

  ExperimentResult r;
  r.document["family"] = family;
  r.document["classification"] = std::string(to_string(cls.cls));
  r.document["criterion_report"] = to_json(rep);
  r.document["m_bound"] = to_json(rep.m);
  r.document["verdicts"] = {{"admissibility", std::string(to_string(rep.verdict))}};
  CheckList checks;
  if (rep.M_bound)
    checks.at_most("sup Re z S(z) <= M/2 + tail", rep.sup_estimate, *rep.M_bound / 2 + rep.tail_bound_at_witness);
  r.tables.push_back(criterion_grid_table(rep, stem + "_grid"));

  if (!probes.empty()) {
    Table wt{stem + "_witnesses", {"n", "re_z", "im_z", "rezS", "single_mode", "closed_form"}, {}};
    for (const auto& w : rep.witness_sequence) {
      const double nr = static_cast<double>(w.n);
      const double closed = std::exp(nr) / (4 * nr * nr);
      wt.add_row({w.n, w.z.real(), w.z.imag(), w.value, w.lower_bound, closed});
      checks.at_least("witness n=" + std::to_string(w.n), w.value, closed * (1 - 1e-12));
    }
    r.tables.push_back(std::move(wt));
  }
  r.document["checks"] = checks.to_json();
  r.checks_passed = checks.all();
  return r;
}

ExperimentResult run_ex2_perturbation(const RunConfig& cfg) {
  const auto A = DiagonalSystem<double>::example2_A(cfg.N);
  const auto Ap = DiagonalSystem<double>::example2_A_prime(cfg.N);
  const PerturbationSequence<double> q = perturbation_between(A, Ap);

  Table entries{"ex2_perturbation", {"k", "re_q", "im_q", "abs_q"}, {}};
  std::int64_t nonzero = 0;
  bool zero_nonpositive = true;
  for (ModeIndex k = q.window.first; k <= q.window.last; ++k) {
    const C v = q.at(k);
    entries.add_row({k, v.real(), v.imag(), std::abs(v)});
    if (v != C(0)) ++nonzero;
    if (k <= 0 && v != C(0)) zero_nonpositive = false;
  }
  Table tail{"ex2_perturbation_tail", {"K", "sup_abs_q_beyond_K", "closed_form_bound"}, {}};
  bool within = true, decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [K, s] : q.tail_sup) {
    const double Kr = static_cast<double>(K);
    const double bound = K == 0 ? std::numeric_limits<double>::infinity() : 1 / std::sqrt(Kr) + std::exp(-Kr);
    tail.add_row({K, s, bound});
    within = within && s <= bound;
    decreasing = decreasing && s < prev;
    prev = s;
  }
  CheckList checks;
  checks.add("q_k = 0 for k <= 0", zero_nonpositive, zero_nonpositive, 1, "==");
  checks.add("tail sup within K^-1/2 + e^-K", within, within, 1, "==");
  checks.add("tail sup strictly decreasing", decreasing, decreasing, 1, "==");
  checks.at_least("nonzero entries", static_cast<double>(nonzero), static_cast<double>(cfg.N));

  ExperimentResult r;
  r.document["declared_rank"] = q.declared_rank ? json(*q.declared_rank) : json("infinite");
  r.document["sup_abs"] = q.sup_abs;
  r.document["nonzero_entries"] = nonzero;
  r.document["finite_rank_error_at_window"] = q.finite_rank_error(cfg.N);
  r.document["checks"] = checks.to_json();
  r.checks_passed = checks.all();
  r.tables.push_back(std::move(entries));
  r.tables.push_back(std::move(tail));
  return r;
}

ExperimentResult run_stability_report(const RunConfig& cfg) {
  const TruncatedSystem<double> ts = truncate(DiagonalSystem<double>::example1(cfg.N, cfg.beta()));
  const FeedbackSystem<double> fs = assemble_feedback(ts);
  StabilityOptions<double> opts;
  opts.witness_indices = cfg.n_list;
  const StabilityReport<double> rep = stability_report(fs, opts);

  const ModeIndex n2 = std::min<ModeIndex>(cfg.N, max_normal_exp_decay<double>());
  const TruncatedSystem<double> ap = truncate(DiagonalSystem<double>::example2_A_prime(n2));
  std::vector<ModeIndex> windows;
  for (ModeIndex w = 1; w <= n2; w *= 2) windows.push_back(w);
  if (windows.back() != n2) windows.push_back(n2);
  const StabilityReport<double> diag = diagonal_stability_report(ap, windows);

  CheckList checks;
  checks.add("feedback spectrum in open left half-plane", rep.spectral_abscissa < 0, rep.spectral_abscissa, 0, "<");
  checks.add("dissipative", rep.contraction_ok, rep.hermitian_part_max, 0, "<=");

  ExperimentResult r;
  r.document["example1_feedback"] = to_json(rep);
  r.document["example2_Aprime"] = to_json(diag);
  r.document["verdicts"] = {{"example1_feedback", std::string(to_string(rep.exp_stability_verdict))},
                            {"example2_Aprime", std::string(to_string(diag.exp_stability_verdict))}};
  r.document["checks"] = checks.to_json();
  r.checks_passed = checks.all();
  r.tables.push_back(spectrum_table(rep, "example1_feedback_spectrum"));
  Table trend{"example2_Aprime_abscissa", {"N", "abscissa"}, {}};
  for (const auto& [N, a] : diag.abscissa_trend) trend.add_row({N, a});
  r.tables.push_back(std::move(trend));
  return r;
}

ExperimentResult run_selftest(const RunConfig& cfg) {
  CheckList checks;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0, 1);
  const double g2 = one_minus_inv_e_sq();

  {
    double worst = 0;
    for (std::int64_t n : {4, 16, 100, 10000}) {
      const double nr = static_cast<double>(n);
      const C v = mode_integral(C(-1 / nr, nr), make_un_signal(n, nr), nr);
      worst = std::max(worst, std::abs(std::norm(v) - nr * g2) / (nr * g2));
    }
    checks.at_most("witness identity |int u_n e^{lambda_n s}|^2 = n(1-1/e)^2", worst, 1e-10);
  }
  {
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const C lambda(-0.05 - 2 * unif(rng), 128 * unif(rng) - 64);
      const InputSignal<double> u = random_unit_signal(rng, 64, 3);
      const double t = 3 * unif(rng);
      const C exact = mode_integral(lambda, u, t);
      const auto q = quadrature_oracle(lambda, u, t);
      worst = std::max(worst, std::abs(exact - q.value) / (1 + std::abs(exact)));
    }
    checks.at_most("closed form vs quadrature oracle", worst, 1e-8);
  }
  const auto ex1 = std::make_shared<const DiagonalSystem<double>>(DiagonalSystem<double>::example1(1024));
  {
    const TruncatedSystem<double> ts = truncate(ex1);
    const InputSignal<double> u = random_unit_signal(rng, 200), v0 = random_unit_signal(rng, 200);
    // v lives after u, so u + v is again a valid piecewise signal
    std::vector<InputSignal<double>::Piece> vp = v0.pieces(), all = u.pieces();
    for (auto& p : vp) p.start += 5, p.end += 5;
    all.insert(all.end(), vp.begin(), vp.end());
    const InputSignal<double> v(vp), sum(all);
    const double t = 7.5;
    const ComplexVector<double> w = phi_state(ts, sum, t).values;
    double rel = (w - phi_state(ts, u, t).values - phi_state(ts, v, t).values).norm() / w.norm();
    const ComplexVector<double> s = phi_state(ts, u.scaled(C(2, -1)), t).values;
    rel = std::max(rel, (s - C(2, -1) * phi_state(ts, u, t).values).norm() / s.norm());
    checks.at_most("phi_state linearity", rel, 1e-12);
    double prev = -1;
    bool ok = true;
    for (std::int64_t n : {16, 256, 1024}) {
      const double m = phi_state(ts, make_un_signal(n, static_cast<double>(n)), static_cast<double>(n)).squared_norm();
      ok = ok && m >= example1_divergence_witness<double>(n) && m > prev;
      prev = m;
    }
    checks.add("divergence lower bounds and trend", ok, ok, 1, "==");
  }
  {
    const TruncatedSystem<double> a = truncate(DiagonalSystem<double>::example2_A(2000));
    const MBound<double> m = m_bound(a);
    constexpr double zeta_3_2 = 2.612375348685488343;
    checks.at_most("M positive side vs zeta(3/2)", std::abs(m.positive.estimate() - zeta_3_2) / zeta_3_2, 1e-6);
  }
  {
    const TruncatedSystem<double> ap = truncate(DiagonalSystem<double>::example2_A_prime(40));
    double worst = std::numeric_limits<double>::infinity();
    for (std::int64_t n : {5, 10, 20}) {
      const double nr = static_cast<double>(n);
      const double val = criterion_sum(ap, probe_example2<double>(n)).scaled;
      worst = std::min(worst, val / (std::exp(nr) / (4 * nr * nr)));
    }
    checks.at_least("Re z_n S(z_n) / (e^n / 4n^2)", worst, 1 - 1e-12);
  }
  const FeedbackSystem<double> fs = assemble_feedback(truncate(ex1, 64));
  {
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const C z(0.2 * unif(rng) + 1e-3, 80 * unif(rng) - 10);
      ComplexVector<double> x(fs.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = C(unif(rng) - 0.5, unif(rng) - 0.5);
      const ComplexVector<double> y = resolvent_apply(fs, z, x);
      worst = std::max(worst, (fs.apply(y) - z * y - x).norm() / x.norm());
    }
    checks.at_most("resolvent residual", worst, 1e-10);
  }
  {
    const FeedbackSystem<double> big = assemble_feedback(truncate(ex1, 128));
    const ComplexMatrix<double> A = big.dense();
    double worst = 0;
    for (ModeIndex n : {10, 100}) {
      const Eigen::Index i = big.base().position_of(n);
      ComplexVector<double> lhs = A.col(i);
      lhs[i] -= big.diagonal()[i];
      worst = std::max(worst, (lhs + big.b()[i] * big.b()).cwiseAbs().maxCoeff());
    }
    checks.at_most("(A - lambda_n) e_n = -b_n b", worst, 1e-13);
  }
  {
    double growth = 0, law = 0;
    for (int i = 0; i < 5; ++i) {
      ComplexVector<double> x(fs.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = C(unif(rng) - 0.5, unif(rng) - 0.5);
      for (double t : {0.1, 1.0, 10.0}) growth = std::max(growth, evolve(fs, x, t).norm() / x.norm() - 1);
      const ComplexVector<double> two = evolve(fs, evolve(fs, x, 0.7), 1.9);
      const ComplexVector<double> one = evolve(fs, x, 2.6);
      law = std::max(law, (two - one).norm() / one.norm());
    }
    checks.at_most("contraction", growth, 1e-9);
    checks.at_most("semigroup law", law, 1e-8);
  }
  {
    const FeedbackPhiEvaluator<double> phi(fs);
    double worst = -1;
    for (int i = 0; i < 10; ++i) {
      const InputSignal<double> u = random_unit_signal(rng, 64);
      worst = std::max(worst, phi(u, u.support_end()).squaredNorm() - 0.5);
    }
    worst = std::max(worst, phi(make_un_signal<double>(16, 16), 16).squaredNorm() - 0.5);
    checks.at_most("||feedback phi||^2 - 1/2", worst, 1e-6);
  }
  {
    Eigen::JacobiSVD<ComplexMatrix<double>> svd(fs.perturbation_dense());
    const auto& s = svd.singularValues();
    checks.at_most("rank one: sigma2/sigma1", s[1] / s[0], 1e-12);
  }
  {
    const auto q = perturbation_between(DiagonalSystem<double>::example2_A(200),
                                        DiagonalSystem<double>::example2_A_prime(200));
    bool ok = !q.declared_rank.has_value();
    for (ModeIndex k = -200; k <= 0; ++k) ok = ok && q.at(k) == C(0);
    for (const auto& [K, s] : q.tail_sup)
      if (K > 0) ok = ok && s <= 1 / std::sqrt(static_cast<double>(K)) + std::exp(-static_cast<double>(K));
    checks.add("perturbation structure", ok, ok, 1, "==");
  }
  {
    bool ok = true;
    std::int64_t l = 1;
    for (std::int64_t k = 1; k <= 100000; ++k) {
      while ((l + 1) * (l + 1) <= k) ++l;
      ok = ok && (is_in_I1(k) == (l * l == k));
    }
    checks.add("is_in_I1 vs enumeration", ok, ok, 1, "==");
  }

  ExperimentResult r;
  r.document["checks"] = checks.to_json();
  r.document["verdicts"] = {{"selftest", checks.all() ? "pass" : "fail"}};
  r.checks_passed = checks.all();
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

std::string_view to_string(Experiment e) {
  for (const auto& [name, value] : experiment_table())
    if (value == e) return name;
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  const auto& t = experiment_table();
  if (auto it = t.find(name); it != t.end()) return it->second;
  return std::nullopt;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [name, value] : experiment_table()) out.push_back(name);
  return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "experiment") {
        const auto e = parse_experiment(v.get<std::string>());
        if (!e) throw InvalidArgument("config: unknown experiment '" + v.get<std::string>() + "'");
        c.experiment = *e;
      } else if (key == "N") {
        c.N = v.get<std::int64_t>();
      } else if (key == "beta_profile") {
        c.beta_profile = v.get<std::string>();
      } else if (key == "beta_scale") {
        c.beta_scale = v.get<double>();
      } else if (key == "beta_exponent") {
        c.beta_exponent = v.get<double>();
      } else if (key == "beta_table") {
        c.beta_table = v.get<std::vector<double>>();
      } else if (key == "n_list") {
        c.n_list = v.get<std::vector<std::int64_t>>();
      } else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "re_min") c.grid.re_min = gv.get<double>();
          else if (gk == "re_max") c.grid.re_max = gv.get<double>();
          else if (gk == "re_points") c.grid.re_points = gv.get<int>();
          else if (gk == "im_points") c.grid.im_points = gv.get<int>();
          else if (gk == "im_margin") c.grid.im_margin = gv.get<double>();
          else if (gk == "include_mirrors") c.grid.include_mirrors = gv.get<bool>();
          else throw InvalidArgument("config: unknown grid key '" + gk + "'");
        }
      } else if (key == "family") {
        c.family = v.get<std::string>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "signals") {
        c.signals = v.get<int>();
      } else if (key == "divergence_threshold") {
        c.divergence_threshold = v.get<double>();
      } else if (key == "feedback_tolerance") {
        c.feedback_tolerance = v.get<double>();
      } else if (key == "out_dir") {
        c.out_dir = v.get<std::string>();
      } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

nlohmann::json RunConfig::echo() const {
  json j;
  j["experiment"] = std::string(to_string(experiment));
  j["N"] = N;
  j["beta_profile"] = beta_profile;
  j["beta_scale"] = beta_scale;
  j["beta_exponent"] = beta_exponent;
  j["beta_table"] = beta_table;
  j["n_list"] = n_list;
  j["grid"] = {{"re_min", grid.re_min},       {"re_max", grid.re_max},       {"re_points", grid.re_points},
               {"im_points", grid.im_points}, {"im_margin", grid.im_margin}, {"include_mirrors", grid.include_mirrors}};
  j["family"] = family;
  j["seed"] = seed;
  j["signals"] = signals;
  j["divergence_threshold"] = divergence_threshold;
  j["feedback_tolerance"] = feedback_tolerance;
  j["dense_limit"] = kDenseLimit;
  j["degenerate_exponent_threshold"] = kDegenerateExponent<double>;
  return j;
}

BetaProfile<double> RunConfig::beta() const {
  if (beta_profile == "linear") return BetaProfile<double>::linear(beta_scale);
  if (beta_profile == "power") return BetaProfile<double>::power(beta_scale, beta_exponent);
  if (beta_profile == "table") return BetaProfile<double>::from_table(beta_table);
  throw InvalidArgument("config: unknown beta_profile '" + beta_profile + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("config: " + m); };
  if (experiment != Experiment::Selftest && N < 1) fail("N must be positive");
  if (signals < 0) fail("signals must be >= 0");
  if (!(divergence_threshold > 0)) fail("divergence_threshold must be positive");
  if (!(feedback_tolerance >= 0)) fail("feedback_tolerance must be >= 0");
  if (grid.re_points < 1 || grid.im_points < 1 || !(grid.re_min > 0) || !(grid.re_max >= grid.re_min) ||
      !(grid.im_margin >= 0))
    fail("grid needs re_min > 0, re_max >= re_min, positive point counts, im_margin >= 0");
  for (std::int64_t n : n_list)
    if (n < 1) fail("n_list entries must be positive");
  (void)beta();

  const auto exceeds = [&](std::int64_t n) { return n > N; };
  switch (experiment) {
    case Experiment::Ex1Divergence:
      for (std::int64_t n : n_list) {
        if (!is_in_I1(n)) fail("ex1-divergence: n=" + std::to_string(n) + " is not a perfect square");
        if (exceeds(n)) fail("ex1-divergence: n=" + std::to_string(n) + " exceeds N");
      }
      break;
    case Experiment::Ex1Feedback:
    case Experiment::StabilityReport:
      if (N > kDenseLimit) fail("N exceeds the dense limit " + std::to_string(kDenseLimit));
      for (std::int64_t n : n_list)
        if (exceeds(n)) fail("n=" + std::to_string(n) + " exceeds N");
      break;
    case Experiment::Ex2Divergence:
      if (N > max_normal_exp_decay<double>()) fail("ex2-divergence: N too large for exp(-N)");
      for (std::int64_t n : n_list)
        if (exceeds(n)) fail("ex2-divergence: n=" + std::to_string(n) + " exceeds N");
      break;
    case Experiment::Ex2Perturbation:
      if (N > max_normal_exp_decay<double>()) fail("ex2-perturbation: N too large for exp(-N)");
      break;
    case Experiment::CriterionScan:
      if (family != "example1-A0" && family != "example2-A" && family != "example2-Aprime" && family != "power-law")
        fail("unknown family '" + family + "'");
      if (family == "example2-Aprime" && N > max_normal_exp_decay<double>()) fail("N too large for exp(-N)");
      break;
    default: break;
  }
}

RunConfig resolve_defaults(RunConfig c) {
  switch (c.experiment) {
    case Experiment::Ex1Divergence:
      if (c.N == 0) c.N = 12000;
      if (c.n_list.empty()) c.n_list = {16, 256, 4096, 10000};
      break;
    case Experiment::Ex1Feedback:
      if (c.N == 0) c.N = 256;
      if (c.n_list.empty()) c.n_list = {1, 4, 16, 64};
      break;
    case Experiment::Ex2Criterion:
      if (c.N == 0) c.N = 2000;
      break;
    case Experiment::Ex2Divergence:
      if (c.N == 0) c.N = 200;
      if (c.n_list.empty()) c.n_list = {5, 10, 20};
      break;
    case Experiment::Ex2Perturbation:
      if (c.N == 0) c.N = 500;
      break;
    case Experiment::CriterionScan:
      if (c.N == 0) c.N = 1000;
      break;
    case Experiment::StabilityReport:
      if (c.N == 0) c.N = 256;
      break;
    case Experiment::Selftest: break;
  }
  return c;
}

ExperimentResult run(const RunConfig& input) {
  const RunConfig cfg = resolve_defaults(input);
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult r;
  switch (cfg.experiment) {
    case Experiment::Ex1Divergence: r = run_ex1_divergence(cfg); break;
    case Experiment::Ex1Feedback: r = run_ex1_feedback(cfg); break;
    case Experiment::Ex2Criterion: r = run_criterion(cfg, "example2-A", "ex2_criterion", {}); break;
    case Experiment::Ex2Divergence: {
      std::vector<ProbePoint<double>> probes;
      for (std::int64_t n : cfg.n_list) probes.push_back(probe_example2<double>(n));
      r = run_criterion(cfg, "example2-Aprime", "ex2_divergence", probes);
      break;
    }
    case Experiment::Ex2Perturbation: r = run_ex2_perturbation(cfg); break;
    case Experiment::CriterionScan: r = run_criterion(cfg, cfg.family, "criterion_scan", {}); break;
    case Experiment::StabilityReport: r = run_stability_report(cfg); break;
    case Experiment::Selftest: r = run_selftest(cfg); break;
  }

  r.document["schema"] = kSchemaVersion;
  r.document["library_version"] = std::string(kVersion);
  r.document["experiment"] = std::string(to_string(cfg.experiment));
  r.document["config"] = cfg.echo();
  r.document["checks_passed"] = r.checks_passed;
  json files = json::array();
  for (const Table& t : r.tables) files.push_back(t.name + ".csv");
  r.document["csv_files"] = files;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string serialize(const ExperimentResult& result) {
  json doc = result.document;
  doc["wall_time_s"] = result.wall_time_s;
  return doc.dump(2) + "\n";
}

void emit(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text_file(dir / "result.json", serialize(result));
  for (const Table& t : result.tables) emit_csv(t, dir);
}

InputSignal<double> random_unit_signal(std::mt19937_64& rng, double omega_max, double horizon) {
  std::uniform_real_distribution<double> unif(0, 1);
  const int pieces = 1 + static_cast<int>(unif(rng) * 3) % 3;
  std::vector<double> cuts;
  for (int i = 0; i < 2 * pieces; ++i) cuts.push_back(horizon * unif(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<InputSignal<double>::Piece> out;
  for (int i = 0; i < pieces; ++i) {
    double a = cuts[2 * i], b = cuts[2 * i + 1];
    if (b - a < 1e-3) b = a + 1e-3;
    if (!out.empty() && a < out.back().end) a = out.back().end;
    if (!(b > a)) b = a + 1e-3;
    const double angle = 2 * std::numbers::pi * unif(rng);
    out.push_back({a, b, std::polar(0.2 + unif(rng), angle), omega_max * (2 * unif(rng) - 1)});
  }
  InputSignal<double> u(out);
  return u.scaled(1 / u.l2_norm());
}

}  // namespace admlab

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "admlab/experiments.hpp"
#include "admlab/feedback.hpp"

#ifndef ADMLAB_CLI_PATH
#error "ADMLAB_CLI_PATH must point at the admissibility-lab executable"
#endif

using namespace admlab;
using C = std::complex<double>;
using Sys = DiagonalSystem<double>;
using Vec = ComplexVector<double>;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = C(g(rng), g(rng));
  return x;
}

const double kG2 = std::pow(-std::expm1(-1.0), 2);

Outcome witness_identity() {
  Outcome o;
  double worst = 0, worst_q = 0;
  for (std::int64_t n : {4, 16, 100, 10000}) {
    const double nr = double(n);
    const C lambda(-1 / nr, nr);
    const InputSignal<double> u = make_un_signal(n, nr);
    const C v = mode_integral(lambda, u, nr);
    worst = std::max(worst, std::abs(std::norm(v) - nr * kG2) / (nr * kG2));
    const auto q = quadrature_oracle(lambda, u, nr);
    o.require(q.converged, "quadrature converged n=" + std::to_string(n));
    worst_q = std::max(worst_q, std::abs(q.value - v) / std::abs(v));
  }
  o.require(worst <= 1e-10, "identity rel err <= 1e-10");
  o.require(worst_q <= 1e-8, "quadrature agreement <= 1e-8");
  o.note("identity rel err " + sci(worst) + ", quadrature " + sci(worst_q));
  return o;
}

Outcome divergence_trend() {
  Outcome o;
  const auto ts = truncate(Sys::example1(12000));
  const double expect[] = {0.7992, 1.5983, 3.1966, 3.9958};
  double prev = -1;
  int i = 0;
  std::string vals;
  for (std::int64_t n : {16, 256, 4096, 10000}) {
    const double nr = double(n);
    const double m = phi_state(ts, make_un_signal(n, nr), nr).squared_norm();
    const double bound = example1_divergence_witness<double>(n);
    o.require(std::abs(bound - expect[i]) <= 5e-5, "bound decimal n=" + std::to_string(n));
    o.require(m >= bound, "measured >= bound n=" + std::to_string(n));
    o.require(m > prev, "strictly increasing at n=" + std::to_string(n));
    vals += (vals.empty() ? "" : ", ") + sci(m) + ">=" + sci(bound);
    prev = m;
    ++i;
  }
  o.note(vals);
  return o;
}

Outcome feedback_bound() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  double worst = -1;
  for (std::int64_t N : {64, 256}) {
    const auto fs = assemble_feedback(truncate(Sys::example1(N)));
    const FeedbackPhiEvaluator<double> phi(fs);
    const double omega_max = fs.diagonal().imag().cwiseAbs().maxCoeff();
    for (int s = 0; s < 50; ++s) {
      const InputSignal<double> u = random_unit_signal(rng, omega_max);
      for (double t : default_time_grid(u, 2 * u.support_end(), 24, 1e-2 * u.support_end()))
        worst = std::max(worst, phi(u, t).squaredNorm());
    }
  }
  o.require(worst <= 0.5 + 1e-6, "||Phi||^2 <= 0.5 + 1e-6");
  o.note("max ||Phi||^2 = " + sci(worst));
  return o;
}

Outcome example2_admissible() {
  Outcome o;
  // independent oracle: partial sums to 10^6 plus midpoint integral tails
  constexpr long K = 1000000;
  std::vector<double> pos, neg;
  for (long k = 1; k <= K; ++k) {
    const double x = double(k);
    pos.push_back(std::pow(x, -1.5));
    neg.push_back(1 / (x * std::sqrt(x + 1)));
  }
  const double X = double(K) + 0.5;
  const double pos_oracle = pairwise_sum(pos) + 2 / std::sqrt(X);
  const double neg_oracle = pairwise_sum(neg) + 2 * std::atanh(1 / std::sqrt(X + 1));

  const auto ts = truncate(Sys::example2_A(2000));
  const CriterionReport<double> rep = sup_search(ts, GridSpec{}, {}, {1e3, false});
  o.require(!rep.m.divergent && rep.M_bound.has_value(), "M finite");
  const double est = rep.m.estimate();
  const double rel = std::abs(est - (pos_oracle + neg_oracle)) / (pos_oracle + neg_oracle);
  const double rel_pos = std::abs(rep.m.positive.estimate() - 2.6123753486854883) / 2.6123753486854883;
  o.require(rel <= 1e-6, "M matches oracle to 1e-6");
  o.require(rel_pos <= 1e-6, "positive side matches zeta(3/2)");
  const double lim = rep.M_bound.value_or(0) / 2 + rep.tail_bound_at_witness;
  o.require(rep.sup_estimate <= lim, "grid sup <= M/2 + tail");
  o.require(rep.verdict == Verdict::Admissible, "verdict admissible");
  o.note("M=" + sci(est) + " (oracle rel " + sci(rel) + "), sup=" + sci(rep.sup_estimate) + " <= " + sci(lim));
  return o;
}

Outcome example2_not_admissible() {
  Outcome o;
  const auto ts = truncate(Sys::example2_A_prime(200));
  std::vector<ProbePoint<double>> probes;
  for (std::int64_t n : {5, 10, 20}) probes.push_back(probe_example2<double>(n));
  const CriterionReport<double> rep = sup_search(ts, GridSpec{}, probes, {1e3, false});
  const double decimals[] = {1.4841, 55.066, 3.0323e5};
  o.require(rep.witness_sequence.size() == 3, "three witnesses");
  std::string vals;
  for (std::size_t i = 0; i < rep.witness_sequence.size() && i < 3; ++i) {
    const auto& w = rep.witness_sequence[i];
    const double nr = double(w.n);
    const double formula = std::exp(nr) / (4 * nr * nr);
    o.require(w.value >= formula, "Re z_n S(z_n) >= e^n/4n^2 at n=" + std::to_string(w.n));
    o.require(std::abs(formula - decimals[i]) <= 1e-4 * decimals[i], "decimal at n=" + std::to_string(w.n));
    vals += (vals.empty() ? "" : ", ") + sci(w.value);
  }
  o.require(rep.verdict == Verdict::NotAdmissible, "verdict not-admissible");
  o.note("witnesses " + vals + ", verdict " + std::string(to_string(rep.verdict)));
  return o;
}

Outcome rank_one_exactness() {
  Outcome o;
  const auto fs = assemble_feedback(truncate(Sys::example1(256)));
  const auto M = fs.dense();
  double worst = 0;
  for (ModeIndex n : {10, 100}) {
    const Eigen::Index i = fs.base().position_of(n);
    Vec col = M.col(i);
    col[i] -= fs.diagonal()[i];
    worst = std::max(worst, (col + fs.b()[i] * fs.b()).cwiseAbs().maxCoeff());
    Eigen::MatrixXcd S = M;
    S.diagonal().array() -= fs.diagonal()[i];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
    const double smin = svd.singularValues().minCoeff();
    const double bound = non_exponential_witness(fs, n);
    o.require(smin <= bound, "sigma_min <= |b_n| ||b|| at n=" + std::to_string(n));
    o.note("n=" + std::to_string(n) + " sigma_min " + sci(smin) + " <= " + sci(bound));
  }
  o.require(worst <= 1e-13, "entrywise error <= 1e-13");
  o.note("max entry error " + sci(worst));
  return o;
}

Outcome resolvent_correctness() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0, 1);
  const auto fs = assemble_feedback(truncate(Sys::example1(128)));
  const auto M = fs.dense();
  double worst = 0, worst_res = 0;
  for (int i = 0; i < 100; ++i) {
    const C z(3 * unif(rng) - 1, 150 * unif(rng) - 10);
    const Vec x = random_vec(rng, 128);
    const Vec y = resolvent_apply(fs, z, x);
    Eigen::MatrixXcd Mz = M;
    Mz.diagonal().array() -= z;
    const Vec ref = Mz.fullPivLu().solve(x);
    worst = std::max(worst, (y - ref).norm() / ref.norm());
    worst_res = std::max(worst_res, (fs.apply(y) - z * y - x).norm() / x.norm());
  }
  o.require(worst <= 1e-10, "matches dense solve to 1e-10");
  o.require(worst_res <= 1e-10, "residual <= 1e-10");
  o.note("rel err " + sci(worst) + ", residual " + sci(worst_res));
  return o;
}

Outcome stability_classification() {
  Outcome o;
  std::mt19937_64 rng(13);
  for (std::int64_t N : {64, 256}) {
    const auto fs = assemble_feedback(truncate(Sys::example1(N)));
    const auto rep = stability_report(fs);
    o.require(rep.spectral_abscissa < 0, "spectrum in open left half-plane N=" + std::to_string(N));
    o.require(rep.contraction_ok, "dissipative N=" + std::to_string(N));
    o.note("N=" + std::to_string(N) + " abscissa " + sci(rep.spectral_abscissa));

    double growth = -1, law = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec x = random_vec(rng, N);
      double prev = x.norm();
      for (double t : {0.5, 2.0, 8.0}) {
        const double n = evolve(fs, x, t).norm();
        growth = std::max(growth, n / prev - 1);
        prev = n;
      }
      const Vec two = evolve(fs, evolve(fs, x, 0.8), 2.3);
      const Vec one = evolve(fs, x, 3.1);
      law = std::max(law, (two - one).norm() / one.norm());
    }
    o.require(growth <= 1e-12, "contraction N=" + std::to_string(N));
    o.require(law <= 1e-10, "semigroup law N=" + std::to_string(N));
  }
  const ModeIndex n2 = 512;
  const auto ap = truncate(Sys::example2_A_prime(n2));
  std::vector<ModeIndex> windows;
  for (ModeIndex w = 1; w <= n2; w *= 2) windows.push_back(w);
  const auto d = diagonal_stability_report(ap, windows);
  bool rising = true;
  for (std::size_t i = 1; i < d.abscissa_trend.size(); ++i)
    rising = rising && d.abscissa_trend[i].second > d.abscissa_trend[i - 1].second;
  o.require(rising && d.abscissa_trend.back().second < 0, "A' window abscissa rises toward 0");
  o.require(std::abs(d.abscissa_trend.front().second + std::exp(-1.0)) <= 1e-15, "window of size 1 gives -1/e");
  o.require(d.exp_stability_verdict == ExpStabilityVerdict::NotExponentiallyStableEvidence, "A' verdict");
  o.note("A' abscissa " + sci(d.abscissa_trend.front().second) + " -> " + sci(d.abscissa_trend.back().second));
  return o;
}

Outcome perturbation_structure() {
  Outcome o;
  const auto fs = assemble_feedback(truncate(Sys::example1(256)));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(fs.perturbation_dense());
  const double ratio = svd.singularValues()[1] / svd.singularValues()[0];
  o.require(ratio <= 1e-12, "sigma2/sigma1 <= 1e-12");

  constexpr ModeIndex N = 500;
  const auto q = perturbation_between(Sys::example2_A(N), Sys::example2_A_prime(N));
  std::int64_t nonzero = 0;
  bool zero_side = true;
  for (ModeIndex k = -N; k <= N; ++k) {
    if (q.at(k) != C(0)) ++nonzero;
    if (k <= 0) zero_side = zero_side && q.at(k) == C(0);
  }
  bool within = true, decreasing = true;
  for (std::size_t i = 0; i < q.tail_sup.size(); ++i) {
    const auto [K, s] = q.tail_sup[i];
    if (K > 0) within = within && s <= 1 / std::sqrt(double(K)) + std::exp(-double(K));
    if (i > 0) decreasing = decreasing && s < q.tail_sup[i - 1].second;
  }
  o.require(zero_side, "q_k = 0 for k <= 0");
  o.require(within, "tail sup <= K^-1/2 + e^-K");
  o.require(decreasing, "tail sup decreasing");
  o.require(nonzero >= N, ">= N nonzero entries");
  o.note("sigma2/sigma1 " + sci(ratio) + ", nonzero " + std::to_string(nonzero));
  return o;
}

std::string without_wall_time(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  j.erase("wall_time_s");
  return j.dump();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  RunConfig c;
  c.experiment = Experiment::Selftest;
  const std::string a = without_wall_time(serialize(run(c)));
  const std::string b = without_wall_time(serialize(run(c)));
  o.require(a == b, "in-process runs identical");

  const auto root = std::filesystem::temp_directory_path() / "admlab_acceptance";
  std::filesystem::remove_all(root);
  std::string texts[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = root / std::to_string(i);
    const std::string cmd = std::string("\"") + ADMLAB_CLI_PATH + "\" selftest -q --out \"" + dir.string() + "\"";
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "cli selftest exit status 0");
    texts[i] = read_file(dir / "result.json");
  }
  o.require(!texts[0].empty() && without_wall_time(texts[0]) == without_wall_time(texts[1]),
            "cli result.json identical modulo wall time");
  o.require(without_wall_time(texts[0]) == a, "cli and in-process documents identical");
  std::filesystem::remove_all(root);
  o.note("result.json " + std::to_string(texts[0].size()) + " bytes");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const Criterion criteria[] = {
      {1, "witness identity for u_n", 1, witness_identity},
      {2, "example1 divergence trend", 10, divergence_trend},
      {3, "feedback input map bound", 60, feedback_bound},
      {4, "example2 A admissible", 30, example2_admissible},
      {5, "example2 A' not admissible", 5, example2_not_admissible},
      {6, "rank-one identity and non-exponential witness", 30, rank_one_exactness},
      {7, "resolvent correctness", 10, resolvent_correctness},
      {8, "stability classification", 60, stability_classification},
      {9, "perturbation structure", 60, perturbation_structure},
      {10, "determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) o.require(false, "runtime " + sci(secs) + " s over budget " + sci(c.budget_s) + " s");
    std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << sci(secs)
              << " s) " << o.detail << '\n';
    failed += o.ok ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "admlab/experiments.hpp"
#include "admlab/mild_solution.hpp"

using namespace admlab;
using C = std::complex<double>;
using Signal = InputSignal<double>;

namespace {
const double g = -std::expm1(-1.0);  // 1 - 1/e
}

TEST_CASE("InputSignal validation and norms") {
  CHECK_THROWS_AS(Signal({{1, 1, C(1), 0}}), InvalidArgument);
  CHECK_THROWS_AS(Signal({{-1, 1, C(1), 0}}), InvalidArgument);
  CHECK_THROWS_AS(Signal({{0, 2, C(1), 0}, {1, 3, C(1), 0}}), InvalidArgument);
  const Signal u({{0, 1, C(3, 4), 2}, {2, 4, C(1), 0}});
  CHECK(u.l2_norm_squared() == doctest::Approx(27));
  CHECK(std::abs(u(0.5) - C(3, 4) * std::exp(C(0, -1))) < 1e-15);
  CHECK(u(1.5) == C(0));
  CHECK(u.support_end() == 4);
}

TEST_CASE("make_un_signal") {
  CHECK(make_un_signal<double>(1, 1).l2_norm() == doctest::Approx(1).epsilon(1e-15));
  const Signal u = make_un_signal<double>(100, 100);
  REQUIRE(u.pieces().size() == 1);
  CHECK(u.pieces()[0].end == 100);
  CHECK(u.pieces()[0].amplitude == C(0.1));
  CHECK(make_un_signal<double>(4, 4).pieces()[0].omega == 4);
  CHECK_THROWS_AS((void)make_un_signal<double>(0, 1), InvalidArgument);
}

TEST_CASE("mode_integral closed forms") {
  CHECK(mode_integral(C(-1), Signal{}, 5.0) == C(0));
  const C v = mode_integral(C(-1), Signal({{0, 1, C(1), 0}}), 1.0);
  CHECK(v.real() == doctest::Approx(g).epsilon(1e-15));
  CHECK(v.imag() == doctest::Approx(0));
  const C w = mode_integral(C(-2), Signal({{0, 3, C(1), 0}}), 3.0);
  CHECK(w.real() == doctest::Approx(-std::expm1(-6.0) / 2).epsilon(1e-15));
  for (std::int64_t n : {4, 16, 100, 10000}) {
    const double nr = double(n);
    const C m = mode_integral(C(-1 / nr, nr), make_un_signal(n, nr), nr);
    CHECK(std::abs(std::norm(m) - nr * g * g) / (nr * g * g) <= 1e-10);
    CHECK(mode_integral(C(-1 / nr, nr), make_un_signal(n, nr), 3 * nr) == m);
  }
}

TEST_CASE("mode_integral degenerate exponent uses the series branch continuously") {
  const Signal u({{0, 2, C(1), 5}});
  const C a = mode_integral(C(-1e-12, 5), u, 2.0);
  const C b = mode_integral(C(-2e-8, 5), u, 2.0);
  CHECK(std::abs(a - C(2)) < 1e-10);
  CHECK(std::abs(b - C(2)) < 1e-7);
}

TEST_CASE("closed form agrees with the quadrature oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 25; ++i) {
    const C lambda(-0.01 - 3 * unif(rng), 200 * unif(rng) - 100);
    const Signal u = random_unit_signal(rng, 100, 3);
    const double t = 3.5 * unif(rng);
    const auto q = quadrature_oracle(lambda, u, t);
    CHECK(q.converged);
    CHECK(std::abs(mode_integral(lambda, u, t) - q.value) <= 1e-8 * (1 + std::abs(q.value)));
  }
  CHECK_THROWS_AS((void)quadrature_oracle(C(-1), Signal{}, 1.0, 4), InvalidArgument);
}

TEST_CASE("phi_state matches an independent high-precision value") {
  // 16 modes, u_16 at t = 16; reference from arbitrary-precision quadrature
  const auto ts = truncate(DiagonalSystem<double>::example1(16));
  const double v = phi_state(ts, make_un_signal(16, 16.0), 16.0).squared_norm();
  CHECK(v == doctest::Approx(0.8006557900750866).epsilon(1e-13));
  CHECK(v >= 2 * g * g);
  CHECK(phi_state(ts, Signal{}, 4.0).squared_norm() == 0);
  CHECK_THROWS_AS((void)phi_state(ts, Signal{}, -1.0), InvalidArgument);
}

TEST_CASE("phi_state is linear in the input") {
  std::mt19937_64 rng(11);
  const auto ts = truncate(DiagonalSystem<double>::example1(300));
  for (int i = 0; i < 5; ++i) {
    const Signal u = random_unit_signal(rng, 300), v0 = random_unit_signal(rng, 300);
    auto vp = v0.pieces();
    auto all = u.pieces();
    for (auto& p : vp) p.start += 4, p.end += 4;
    all.insert(all.end(), vp.begin(), vp.end());
    const Signal v(vp), sum(all);
    const auto lhs = phi_state(ts, sum, 9.0).values;
    const auto rhs = (phi_state(ts, u, 9.0).values + phi_state(ts, v, 9.0).values).eval();
    CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    const C c(-0.3, 2);
    CHECK((phi_state(ts, u.scaled(c), 2.0).values - c * phi_state(ts, u, 2.0).values).norm() <= 1e-12);
  }
}

TEST_CASE("input map is frozen after the support ends") {
  // Phi_t = int_0^t e^{As} b u(s) ds stops changing once u vanishes
  const auto ts = truncate(DiagonalSystem<double>::example2_A(50));
  const Signal u({{0, 2, C(1, 1), 3}});
  const auto a = phi_state(ts, u, 2.0).values;
  const auto b = phi_state(ts, u, 50.0).values;
  CHECK((a - b).norm() == 0);
}

TEST_CASE("phi_sup_norm") {
  const auto one = truncate(DiagonalSystem<double>::explicit_modes({C(-1)}, {C(1)}));
  const Signal u({{0, 1, C(1), 0}});
  const auto s = phi_sup_norm(one, u, {1.0});
  CHECK(s.value == doctest::Approx(g).epsilon(1e-15));
  const auto z = phi_sup_norm(one, Signal{}, {0.5, 1.0});
  CHECK(z.value == 0);
  CHECK(z.argmax == 0.5);
  CHECK_THROWS_AS((void)phi_sup_norm(one, u, {}), InvalidArgument);

  const auto ts = truncate(DiagonalSystem<double>::example1(300));
  for (std::int64_t n : {16, 64, 256}) {
    const Signal un = make_un_signal(n, double(n));
    const auto sup = phi_sup_norm(ts, un, default_time_grid(un, 2.0 * double(n), 16));
    CHECK(sup.value * sup.value >= g * g * std::pow(double(n), 0.25));
  }
}

TEST_CASE("default_time_grid contains the breakpoints") {
  const Signal u({{0, 1.5, C(1), 0}, {2, 3, C(1), 0}});
  const auto grid = default_time_grid(u, 10.0, 8);
  for (double b : {1.5, 2.0, 3.0}) CHECK(std::find(grid.begin(), grid.end(), b) != grid.end());
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(grid.back() == 10.0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "admlab/spectral_core.hpp"

using namespace admlab;
using C = std::complex<double>;
using Sys = DiagonalSystem<double>;

TEST_CASE("is_in_I1 on small and large squares") {
  CHECK(is_in_I1(16));
  CHECK_FALSE(is_in_I1(15));
  CHECK(is_in_I1(100000000));
  CHECK(is_in_I1(1));
  CHECK_FALSE(is_in_I1(99999999));
  CHECK(is_in_I1(std::int64_t(3037000499) * 3037000499));
  CHECK_THROWS_AS((void)is_in_I1(0), InvalidArgument);
  static_assert(is_in_I1(49) && !is_in_I1(50));
}

TEST_CASE("example1 generator values") {
  const Sys s = Sys::example1(100);
  CHECK(s.control(4).real() == doctest::Approx(0.5946035575013605).epsilon(1e-15));
  CHECK(s.control(3).real() == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(s.eigenvalue(9) == C(-1.0 / 9, 9));
  CHECK(s.window() == IndexWindow{1, 100});
  CHECK_THROWS_AS((void)s.eigenvalue(101), InvalidArgument);
  CHECK_THROWS_AS((void)Sys::example1(0), InvalidArgument);
  CHECK(s.generate_eigenvalue(1000) == C(-1e-3, 1000));
}

TEST_CASE("example1 custom beta profiles") {
  const Sys p = Sys::example1(10, BetaProfile<double>::power(2, 1.5));
  CHECK(p.eigenvalue(4).imag() == doctest::Approx(16));
  const Sys t = Sys::example1(3, BetaProfile<double>::from_table({0.5, 2, 7}));
  CHECK(t.eigenvalue(3).imag() == 7);
  CHECK_THROWS_AS(Sys::example1(3, BetaProfile<double>::from_table({1, 1, 2})), InvalidArgument);
  CHECK_THROWS_AS(Sys::example1(4, BetaProfile<double>::from_table({1, 2, 3})), InvalidArgument);
  CHECK_THROWS_AS(Sys::example1(4, BetaProfile<double>::linear(-1)), InvalidArgument);
}

TEST_CASE("example2 generator values") {
  const Sys a = Sys::example2_A(10), ap = Sys::example2_A_prime(10);
  CHECK(a.eigenvalue(1) == C(-1, 1));
  CHECK(ap.eigenvalue(1).real() == doctest::Approx(-0.36787944117144233).epsilon(1e-15));
  CHECK(ap.eigenvalue(1).imag() == 1);
  CHECK(a.control(1) == C(1));
  CHECK(a.eigenvalue(0) == C(-1));
  CHECK(ap.eigenvalue(0) == C(-1));
  CHECK(a.control(0) == C(0));
  CHECK(a.eigenvalue(-4).real() == doctest::Approx(-2.23606797749979).epsilon(1e-15));
  CHECK(a.control(-4).real() == doctest::Approx(0.5));
  CHECK(a.eigenvalue(4) == C(-0.5, 4));
}

TEST_CASE("example2 A' rejects windows where exp(-N) is subnormal") {
  CHECK_NOTHROW((void)Sys::example2_A_prime(max_normal_exp_decay<double>()));
  CHECK_THROWS_AS((void)Sys::example2_A_prime(800), InvalidArgument);
  CHECK(Sys::example2_A_prime(708).eigenvalue(708).real() < 0);
}

TEST_CASE("explicit_modes validation") {
  CHECK_THROWS_AS(Sys::explicit_modes({C(-1), C(-1)}, {C(1), C(1)}), InvalidArgument);
  CHECK_THROWS_AS(Sys::explicit_modes({C(0, 1)}, {C(1)}), InvalidArgument);
  CHECK_THROWS_AS(Sys::explicit_modes({C(-1)}, {}), InvalidArgument);
  const Sys s = Sys::explicit_modes({C(-1), C(-2)}, {C(1), C(1)});
  CHECK(s.window() == IndexWindow{1, 2});
  CHECK_FALSE(s.infinite_family());
}

TEST_CASE("truncate sizes and contents") {
  const auto t1 = truncate(Sys::example1(50), 10);
  CHECK(t1.size() == 10);
  CHECK(t1.lambda[9] == C(-0.1, 10));
  const auto t2 = truncate(Sys::example2_A(50), 5);
  CHECK(t2.size() == 11);
  CHECK(t2.index_at(0) == -5);
  CHECK(t2.position_of(0) == 5);
  CHECK(t2.lambda[t2.position_of(3)] == Sys::example2_A(50).eigenvalue(3));
}

TEST_CASE("example1 tail_b_sq encloses the omitted sum") {
  const auto t = truncate(Sys::example1(100));
  REQUIRE(t.tail_b_sq.has_value());
  // direct partial sum over 101..10^7 is a lower bound on the true tail
  double partial = 0;
  for (std::int64_t k = 10000000; k > 100; --k) {
    const double b = is_in_I1(k) ? std::pow(double(k), -0.375) : 1.0 / double(k);
    partial += b * b;
  }
  CHECK(*t.tail_b_sq >= partial);
  // the squares beyond 10^7 contribute about 2/sqrt(3162); the bound is within a few percent
  CHECK(*t.tail_b_sq <= 1.05 * (partial + 2.0 / std::sqrt(3162.0)));
}

TEST_CASE("spectrum stays in the open left half-plane and abscissa approaches 0") {
  double prev = -1e300;
  for (std::int64_t N : {1, 10, 100, 1000, 10000}) {
    const auto t = truncate(Sys::example1(N));
    const double mx = t.lambda.real().maxCoeff();
    CHECK(mx < 0);
    CHECK(mx == doctest::Approx(-1.0 / double(N)));
    CHECK(mx > prev);
    prev = mx;
  }
  for (std::int64_t N : {5, 50, 500}) {
    const auto a = truncate(Sys::example2_A(N));
    const auto ap = truncate(Sys::example2_A_prime(N));
    CHECK(a.lambda.real().maxCoeff() == doctest::Approx(-1 / std::sqrt(double(N))));
    CHECK(ap.lambda.real().maxCoeff() == doctest::Approx(-std::exp(-double(N))));
  }
}

TEST_CASE("example1 eigenvalue modulus is unbounded beyond every window") {
  const Sys s = Sys::example1(1);
  double prev = 0;
  for (std::int64_t N : {10, 100, 1000}) {
    double mn = 1e300;
    for (std::int64_t k = N + 1; k <= 4 * N; ++k) mn = std::min(mn, std::abs(s.generate_eigenvalue(k)));
    CHECK(mn > prev);
    prev = mn;
  }
}

TEST_CASE("classify_control") {
  CHECK(classify_control(Sys::example1(100)).cls == ControlClass::Bounded);
  CHECK(classify_control(Sys::example2_A(100)).cls == ControlClass::Unbounded);
  PowerLawParams<double> p;
  p.freq_power = 2;
  p.control_decay = 0;
  CHECK(classify_control(Sys::power_law(100, p)).cls == ControlClass::Unbounded);
  p.control_decay = 1;
  CHECK(classify_control(Sys::power_law(100, p)).cls == ControlClass::Bounded);
}

TEST_CASE("perturbation between the two example2 generators") {
  const auto q = perturbation_between(Sys::example2_A(200), Sys::example2_A_prime(200));
  CHECK(std::abs(q.at(1)) == doctest::Approx(0.6321205588285577).epsilon(1e-15));
  CHECK(q.at(-3) == C(0));
  CHECK(std::abs(q.at(100)) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_FALSE(q.declared_rank.has_value());
  for (std::int64_t k = 1; k <= 200; ++k)
    CHECK(std::abs(q.at(k)) <= 1 / std::sqrt(double(k)) + std::exp(-double(k)));
  for (std::size_t i = 1; i < q.tail_sup.size(); ++i) CHECK(q.tail_sup[i].second <= q.tail_sup[i - 1].second);
  CHECK(q.finite_rank_error(200) == doctest::Approx(1 / std::sqrt(201.0)));
  CHECK_THROWS_AS((void)perturbation_between(Sys::example2_A(10), Sys::example2_A_prime(11)), WindowMismatch);
}

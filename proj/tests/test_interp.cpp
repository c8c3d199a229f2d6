#include <cmath>
#include <random>

#include "doctest.h"

#include <hetlab/interp.hpp>

using namespace hetlab;

TEST_CASE("periodic spline reproduces a trigonometric function") {
  const std::size_t n = 256;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = kTwoPi * static_cast<double>(i) / n;
    y[i] = std::sin(x[i]) + 0.3 * std::cos(2 * x[i]);
  }
  const PeriodicSpline s(x, y);
  for (double t = -7.0; t < 14.0; t += 0.137) {
    CHECK(s(t) == doctest::Approx(std::sin(t) + 0.3 * std::cos(2 * t)).epsilon(1e-7));
    CHECK(s.deriv(t) == doctest::Approx(std::cos(t) - 0.6 * std::sin(2 * t)).epsilon(1e-5));
  }
  CHECK(std::abs(s(0.0) - s(kTwoPi)) <= 1e-10);
  CHECK(std::abs(s.deriv(0.0) - s.deriv(kTwoPi)) <= 1e-10);
}

TEST_CASE("non-uniform knots with an offset start") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    const double t = 1.0 + kTwoPi * (i + jitter(rng)) / 200.0;
    x.push_back(t);
    y.push_back(std::cos(t));
  }
  const PeriodicSpline s(x, y);
  CHECK(s(0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s(3.0) == doctest::Approx(std::cos(3.0)).epsilon(1e-6));
}

TEST_CASE("cyclic tridiagonal solve") {
  const std::vector<double> a{1, 1, 1, 1, 1}, b{4, 4, 4, 4, 4}, c{1, 1, 1, 1, 1};
  const std::vector<double> u{1, -2, 3, 0.5, 2};
  std::vector<double> r(5);
  for (std::size_t i = 0; i < 5; ++i) r[i] = a[i] * u[(i + 4) % 5] + b[i] * u[i] + c[i] * u[(i + 1) % 5];
  const auto sol = solve_cyclic_tridiagonal(a, b, c, r);
  for (std::size_t i = 0; i < 5; ++i) CHECK(sol[i] == doctest::Approx(u[i]).epsilon(1e-13));
}

TEST_CASE("bad knots are rejected") {
  CHECK_THROWS_AS(PeriodicSpline({0, 1}, {0, 1}), InputError);
  CHECK_THROWS_AS(PeriodicSpline({0, 2, 1}, {0, 1, 2}), InputError);
  CHECK_THROWS_AS(PeriodicSpline({0, 3, 6.5}, {0, 1, 2}), InputError);
}

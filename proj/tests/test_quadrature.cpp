#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "periodic/quadrature.hpp"

using periodic::quadrature::integrate;

TEST_CASE("polynomials are integrated exactly") {
  const auto r = integrate([](double x) { return 3.0 * x * x - 2.0 * x + 1.0; }, -1.0, 2.0, 1e-14);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(9.0 - 3.0 + 3.0).epsilon(1e-15));
}

TEST_CASE("endpoint singularity is resolved by bisection") {
  const auto r = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-13);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 2.0 / 3.0) < 1e-12);
  CHECK(r.abs_err <= 1e-13);
}

TEST_CASE("agreement with an independent Gauss-Kronrod implementation") {
  auto f = [](double x) { return std::cos(7.0 * x) * std::exp(-x * x / 3.0) + 1.0 / (1.0 + x * x); };
  const auto mine = integrate(f, -4.0, 5.0, 1e-14, 1e-14);
  const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -4.0, 5.0, 20, 1e-15);
  CHECK(mine.converged);
  CHECK(std::abs(mine.value - ref) < 1e-13);
}

TEST_CASE("relative tolerance and interval cap") {
  const auto r = integrate([](double x) { return std::exp(x); }, 0.0, 30.0, 0.0, 1e-12);
  CHECK(std::abs(r.value / (std::exp(30.0) - 1.0) - 1.0) < 1e-12);
  const auto capped = integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, 1e-15, 0.0, 3);
  CHECK_FALSE(capped.converged);
  CHECK(capped.evaluations > 0);
}

TEST_CASE("empty and reversed intervals") {
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-12).value == 0.0);
  CHECK(integrate([](double) { return 1.0; }, 3.0, 1.0, 1e-12).value == doctest::Approx(-2.0));
}

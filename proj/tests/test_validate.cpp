#include <cmath>
#include <numbers>

#include "doctest.h"
#include "periodic/specfun.hpp"
#include "periodic/validate.hpp"

using namespace periodic;
using namespace periodic::validate;
using std::numbers::pi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// s ≠ 1 law written out independently of the library's closed forms.
double riesz_law(int n, double s) {
  const double z = specfun::riemann_zeta(s);
  return 2.0 * std::pow(n, 1.0 + s) * z - 2.0 * n * z -
         n * (n - 1.0) * 2.0 * std::sqrt(pi) / (specfun::gamma(s / 2.0) * (s - 1.0));
}

}  // namespace

TEST_CASE("comparison semantics") {
  const auto a = compare("a", 1.0 + 1e-10, 1.0, 1e-9);
  CHECK(a.passed);
  const auto b = compare("b", 1e6 + 1.0, 1e6, 1e-5);
  CHECK(b.passed);  // relative error 1e-6
  const auto c = compare("c", 2.0, 1.0, 1e-3);
  CHECK_FALSE(c.passed);
  CHECK(c.abs_err == 1.0);
  CHECK(c.to_json().at("name") == "c");
}

TEST_CASE("exact one-dimensional Riesz energies") {
  const auto r = check_riesz_1d(2, 2.0);
  CHECK(r.passed);
  CHECK(std::abs(r.rhs - (2.0 * pi * pi - 4.0 * std::sqrt(pi))) < 1e-12);
  CHECK(check_riesz_1d(5, 0.5).passed);
  CHECK(check_riesz_1d(7, 3.0).passed);
  for (int n : {2, 9}) {
    for (double s : {0.5, 2.0, 3.0}) CHECK(std::abs(riesz_1d_energy(n, s) - riesz_law(n, s)) < 1e-12 * std::abs(riesz_law(n, s)));
  }
}

TEST_CASE("Riesz s = 1 constant is the limit of the s ≠ 1 law") {
  for (int n : {2, 5, 12}) {
    const double h = 1e-3;
    // Second-order Richardson on the symmetric pair removes the O(h^2) term.
    const double m1 = 0.5 * (riesz_law(n, 1.0 + h) + riesz_law(n, 1.0 - h));
    const double m2 = 0.5 * (riesz_law(n, 1.0 + 2.0 * h) + riesz_law(n, 1.0 - 2.0 * h));
    const double limit = (4.0 * m1 - m2) / 3.0;
    CHECK(std::abs(riesz_1d_energy(n, 1.0) - limit) < 1e-8 * limit);
  }
  const double alt = riesz_1d_energy_s1_alternative(2);
  CHECK(std::abs(alt - (8.0 * std::log(2.0) + 4.0 * specfun::euler_gamma())) < 1e-13);
  // The alternative constant differs by N(N-1)(γ + 2 log 2).
  CHECK(std::abs(alt - riesz_1d_energy(2, 1.0) - 2.0 * (specfun::euler_gamma() + 2.0 * std::log(2.0))) < 1e-12);
  const auto triple = check_riesz_1d_s1(2);
  bool saw_observation = false;
  for (const auto& r : triple) {
    if (r.observation) {
      saw_observation = true;
      CHECK_FALSE(r.passed);
    } else {
      CHECK(r.passed);
    }
  }
  CHECK(saw_observation);
}

TEST_CASE("log-Riesz energies") {
  CHECK(check_logriesz_1d(3, 2.0).passed);
  CHECK(check_logriesz_1d(4, 0.5).passed);
  for (const auto& r : check_logriesz_1d_s1(2)) {
    CAPTURE(r.name);
    CHECK(r.abs_err <= 1e-5 * std::max(1.0, std::abs(r.rhs)));
  }
  // The s ≠ 1 law is twice the s-derivative of the Riesz law.
  for (double s : {0.5, 2.0}) {
    const double h = 1e-4;
    const double fd = (riesz_law(3, s + h) - riesz_law(3, s - h)) / h;
    CHECK(std::abs(logriesz_1d_energy(3, s) - fd) < 1e-6 * std::abs(fd));
  }
}

TEST_CASE("logarithmic energies") {
  CHECK(std::abs(log_1d_energy(2) - 4.0 * (std::sqrt(pi) - std::log(2.0))) < 1e-14);
  CHECK(log_1d_energy(1) == 0.0);
  CHECK(check_log_1d(1).passed);
  CHECK(check_log_1d(8).passed);
}

TEST_CASE("multiplication formula") {
  CHECK(check_multiplication(1, 2.0).passed);
  const auto r = check_multiplication(4, 3.0);
  CHECK(r.passed);
  CHECK(std::abs(r.rhs - 64.0 * 1.2020569031595942854) < 1e-12);
  CHECK(check_multiplication(7, 0.6).passed);
}

TEST_CASE("Poisson summation") {
  const auto z1 = Lattice::preset("Z1");
  const auto r = check_poisson(z1, vec({0.0}), pi);
  CHECK(r.passed);
  double theta = 0.0;
  for (int n = -10; n <= 10; ++n) theta += std::exp(-pi * n * n);
  CHECK(std::abs(r.lhs - theta) < 1e-15);
  const auto big = check_poisson(z1, vec({0.3}), 50.0);
  CHECK(big.passed);
  CHECK(std::abs(big.lhs - std::exp(-50.0 * 0.09)) < 1e-6 * big.lhs);
  CHECK(check_poisson(Lattice::preset("hex"), vec({0.37, -0.81}), 2.0).passed);
}

TEST_CASE("constant shift law") {
  const auto z1 = Lattice::preset("Z1");
  const auto a = check_constant_shift(z1, vec({0.2}), 3.0);
  const auto b = check_constant_shift(z1, vec({0.45}), 3.0);
  CHECK(a.passed);
  CHECK(b.passed);
  CHECK(std::abs(a.lhs - b.lhs) < 1e-10);
  CHECK(std::abs(a.rhs - 2.0) < 1e-14);
  const auto c = check_constant_shift(Lattice::preset("Z2"), vec({0.3, 0.7}), 4.0);
  CHECK(c.passed);
  CHECK(std::abs(c.rhs - pi) < 1e-14);
}

TEST_CASE("convexity and symmetry of the one-dimensional kernel") {
  CHECK(check_convexity_1d(2.0, 101).passed);
  CHECK(check_convexity_1d(0.5, 101).passed);
}

TEST_CASE("hexagonal versus square lattice sums") {
  for (double s : {3.0, 4.0}) {
    const auto r = observe_hex_vs_square(s);
    CHECK(r.observation);
    CHECK(r.lhs < r.rhs);
  }
}

TEST_CASE("default suite passes and is deterministic") {
  const auto a = run_suite("all", 2);
  const auto b = run_suite("all", 1);
  CHECK(all_passed(a));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].lhs == b[i].lhs);
  }
  for (const char* suite : {"1d", "poisson", "shift", "specfun"}) CHECK(all_passed(run_suite(suite)));
}

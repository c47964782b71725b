#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "periodic/lattice.hpp"

namespace periodic::validate {

struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Observations are reported for review and never fail a suite.
  bool observation = false;
  std::string note;

  nlohmann::json to_json() const;
};

/// passed ⇔ abs_err <= tolerance or rel_err <= tolerance.
CheckResult compare(std::string name, double lhs, double rhs, double tolerance);

/// Minimal periodic Riesz s-energy of N points on [0,1): the s ≠ 1 law, and
/// its limit 2N² log N + N(N-1)(2γ + ψ(1/2)) at s = 1.
double riesz_1d_energy(int n, double s);
/// The alternative s = 1 expression 2N² log N + 2N(N-1)γ, kept for comparison.
double riesz_1d_energy_s1_alternative(int n);
/// Minimal periodic log-Riesz s-energy; s = 1 uses the γ₁, ψ(1/2), ψ'(1/2) form.
double logriesz_1d_energy(int n, double s);
/// Minimal periodic logarithmic energy 2N(√π(N-1) - log N).
double log_1d_energy(int n);

/// Energy of N equally spaced points computed with the Ewald kernel.
double equally_spaced_energy(int n, const std::string& potential, double tol = 1e-13);

CheckResult check_riesz_1d(int n, double s, double tolerance = 1e-9);
CheckResult check_logriesz_1d(int n, double s, double tolerance = 1e-7);

/// Three-way comparison at s = 1: closed form, kernel sum, and Richardson
/// extrapolation of the s ≠ 1 law from s = 1 ± h. One result per pair.
std::vector<CheckResult> check_logriesz_1d_s1(int n, double tolerance = 1e-5);
/// Same three-way comparison for the Riesz law at s = 1, including the
/// alternative constant 2N(N-1)γ as an observation.
std::vector<CheckResult> check_riesz_1d_s1(int n, double tolerance = 1e-9);

CheckResult check_log_1d(int n, double tolerance = 1e-9);
CheckResult check_multiplication(int n, double s, double tolerance = 1e-10);
CheckResult check_poisson(const Lattice& lattice, const Eigen::VectorXd& x, double omega, double tolerance = 1e-12);

/// Brute-force Σ_v |q+v|^{-s} for s > d. d = 1: exact terms to the radius
/// plus an Euler–Maclaurin tail. d >= 2: terms weighted by a smooth cutoff
/// that falls from 1 at the radius to 0 at twice the radius, plus the
/// continuum integral of the removed part.
double brute_force_lattice_sum(const Lattice& lattice, const Eigen::VectorXd& q, double s, double radius);

/// Brute-force sum minus the Riesz kernel against 2π^{d/2}/(Γ(s/2)(s-d)).
CheckResult check_constant_shift(const Lattice& lattice, const Eigen::VectorXd& q, double s, double radius = 0.0,
                                 double tolerance = 1e-9);

/// Second differences of q ↦ K_s(q, 0) on the interior of a uniform grid, and
/// the symmetry K_s(q) = K_s(1 - q) measured relative to max(1, |K_s|).
CheckResult check_convexity_1d(double s, int grid, double symmetry_tol = 1e-12);

/// ζ_hex(s) versus ζ_square(s); reported as an observation.
CheckResult observe_hex_vs_square(double s);

/// Suites: "all", "1d", "poisson", "shift", "specfun".
std::vector<CheckResult> run_suite(const std::string& suite, int threads = 1);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace periodic::validate

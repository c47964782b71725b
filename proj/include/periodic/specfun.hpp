#pragma once

// Real special functions used by the kernels and the closed-form checks.
// Everything is double precision and real-valued.

namespace periodic::specfun {

struct PrecisionPolicy {
  double target_rel_err = 1e-13;
  int max_terms = 5000;

  /// Throws Error{InvalidArgument} unless 0 < target_rel_err <= 1e-3 and max_terms > 0.
  void validate() const;
};

/// Value plus a flag raised when a series or continued fraction did not meet
/// the requested tolerance within `max_terms`.
struct Evaluation {
  double value = 0.0;
  bool precision_loss = false;
};

/// Upper incomplete gamma Γ(σ, x) = ∫_x^∞ t^{σ-1} e^{-t} dt for any real σ when x > 0.
/// Throws Error{DivergentIntegral} for x = 0 with σ <= 0.
double gamma_upper(double sigma, double x);
Evaluation gamma_upper(double sigma, double x, const PrecisionPolicy& policy);

/// ∂Γ(σ, x)/∂σ by a central difference in σ (step 1e-6).
double gamma_upper_dsigma(double sigma, double x);

double gamma(double x);
double log_gamma(double x);

double erfc(double x);

/// E₁(x) = ∫_x^∞ e^{-t}/t dt, x > 0.
double exp_integral_e1(double x);

double digamma(double x);
double trigamma(double x);

/// Hurwitz zeta ζ(s; q) = Σ_{n>=0} (n+q)^{-s}, analytically continued in s.
/// Throws Error{PoleAtOne} if |s-1| < 1e-12, Error{DomainError} if q <= 0.
double hurwitz_zeta(double s, double q);
Evaluation hurwitz_zeta(double s, double q, const PrecisionPolicy& policy);

/// ∂ζ(s; q)/∂s.
double hurwitz_zeta_ds(double s, double q);

/// ∂ζ(s; q)/∂q = -s ζ(s+1; q).
double hurwitz_zeta_dq(double s, double q);

double riemann_zeta(double s);
double riemann_zeta_ds(double s);

double euler_gamma();

/// First Stieltjes constant, computed on first use from
///   lim_{m→∞} ( Σ_{k<=m} log(k)/k - log(m)^2/2 )
/// with Euler–Maclaurin tail corrections.
double stieltjes_gamma1();

}  // namespace periodic::specfun

#include "periodic/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "periodic/error.hpp"

namespace periodic::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// B_{2k} for k = 1..8.
constexpr std::array<double, 8> kBernoulli = {
    1.0 / 6.0,    -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,   -691.0 / 2730.0, 7.0 / 6.0,  -3617.0 / 510.0,
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Γ(σ, x) for x > max(σ+1, 1.5): modified Lentz on the Legendre continued fraction.
Evaluation gamma_upper_cf(double a, double x, const PrecisionPolicy& p) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  bool converged = false;
  for (int i = 1; i <= p.max_terms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) {
      converged = true;
      break;
    }
  }
  return {std::exp(-x + a * std::log(x)) * h, !converged};
}

// Γ(σ, x) = Γ(σ) - γ(σ, x) with the power series for γ; used for σ > 1, x < σ + 1.
Evaluation gamma_upper_series(double a, double x, const PrecisionPolicy& p) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  bool converged = false;
  for (int n = 1; n <= p.max_terms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps * 0.5) {
      converged = true;
      break;
    }
  }
  const double lower = sum * std::exp(-x + a * std::log(x));
  return {std::tgamma(a) - lower, !converged};
}

// ζ(k) for k = 2..40 from the Euler–Maclaurin sum (no dependence on the
// small-a incomplete gamma path below).
double integer_zeta(int k);

// (Γ(1+a) - 1) / a, accurate near a = 0 through
// log Γ(1+a) = -γa + Σ_{k>=2} (-1)^k ζ(k) a^k / k.
double gamma1p_minus_one_over_a(double a) {
  if (a == 0.0) return -kEulerGamma;
  if (std::abs(a) >= 0.2) return (std::tgamma(1.0 + a) - 1.0) / a;
  double series = 0.0;  // log Γ(1+a) / a + γ
  double p = a;
  for (int k = 2; k <= 40; ++k) {
    const double t = ((k % 2) ? -1.0 : 1.0) * integer_zeta(k) * p / k;
    series += t;
    if (std::abs(t) < kEps * 1e-2) break;
    p *= a;
  }
  const double log_over_a = -kEulerGamma + series;
  const double log_value = a * log_over_a;
  if (log_value == 0.0) return log_over_a;
  return std::expm1(log_value) / log_value * log_over_a;
}

// Γ(a, x) = [Γ(1+a) - x^a]/a + x^a Σ_{n>=1} (-1)^{n+1} x^n / (n! (a+n)),
// stable for a in [-1/2, 1] (including a = 0) and moderate x.
Evaluation gamma_upper_small_a(double a, double x, const PrecisionPolicy& p) {
  const double lx = std::log(x);
  const double g2 = (a == 0.0) ? lx : std::expm1(a * lx) / a;
  double term = 1.0;  // x^n / n!
  double sum = 0.0;
  bool converged = false;
  for (int n = 1; n <= p.max_terms; ++n) {
    term *= x / n;
    const double t = ((n % 2) ? term : -term) / (a + n);
    sum += t;
    if (std::abs(t) < kEps * 0.5 * std::max(std::abs(sum), 1e-300)) {
      converged = true;
      break;
    }
  }
  const double xa = std::exp(a * lx);
  return {gamma1p_minus_one_over_a(a) - g2 + xa * sum, !converged};
}

Evaluation gamma_upper_impl(double a, double x, const PrecisionPolicy& p) {
  if (x > std::max(a + 1.0, 1.5)) return gamma_upper_cf(a, x, p);
  if (a > 1.0) return gamma_upper_series(a, x, p);
  if (a >= -0.5) return gamma_upper_small_a(a, x, p);
  // Upward recurrence Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a.
  const Evaluation up = gamma_upper_impl(a + 1.0, x, p);
  return {(up.value - std::exp(a * std::log(x) - x)) / a, up.precision_loss};
}

// Euler–Maclaurin for ζ(s; q) with `shift` explicit terms. Returns the value
// and an estimate of the first omitted correction.
struct EulerMaclaurin {
  double value;
  double tail_estimate;
};

EulerMaclaurin hurwitz_em(double s, double q, int shift) {
  double sum = 0.0;
  for (int n = shift - 1; n >= 0; --n) sum += std::pow(n + q, -s);
  const double a = shift + q;
  const double a_pow = std::pow(a, -s);
  sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
  // Corrections B_{2k}/(2k)! (s)_{2k-1} a^{-s-2k+1}, k = 1..6.
  double rising = s;      // (s)_{2k-1}
  double power = a_pow / a;  // a^{-s-2k+1}
  double estimate = 0.0;
  for (int k = 1; k <= 7; ++k) {
    const double t = kBernoulli[static_cast<std::size_t>(k - 1)] / factorial(2 * k) * rising * power;
    if (k <= 6) {
      sum += t;
    } else {
      estimate = std::abs(t);
    }
    rising *= (s + 2 * k - 1) * (s + 2 * k);
    power /= a * a;
  }
  return {sum, estimate};
}

double integer_zeta(int k) {
  static const std::array<double, 41> table = [] {
    std::array<double, 41> t{};
    for (int j = 2; j <= 40; ++j) t[static_cast<std::size_t>(j)] = hurwitz_em(j, 1.0, 16).value;
    return t;
  }();
  return table[static_cast<std::size_t>(k)];
}

// s-derivative of the same expansion, term by term.
EulerMaclaurin hurwitz_em_ds(double s, double q, int shift) {
  double sum = 0.0;
  for (int n = shift - 1; n >= 0; --n) {
    const double b = n + q;
    sum -= std::log(b) * std::pow(b, -s);
  }
  const double a = shift + q;
  const double la = std::log(a);
  const double a_pow = std::pow(a, -s);
  const double sm1 = s - 1.0;
  sum += a * a_pow * (-la / sm1 - 1.0 / (sm1 * sm1));
  sum -= 0.5 * la * a_pow;
  double rising = s;
  double d_rising = 1.0;
  double power = a_pow / a;
  double estimate = 0.0;
  for (int k = 1; k <= 7; ++k) {
    const double coef = kBernoulli[static_cast<std::size_t>(k - 1)] / factorial(2 * k);
    const double t = coef * (d_rising - rising * la) * power;
    if (k <= 6) {
      sum += t;
    } else {
      estimate = std::abs(t);
    }
    for (int j = 2 * k - 1; j <= 2 * k; ++j) {
      d_rising = d_rising * (s + j) + rising;
      rising *= (s + j);
    }
    power /= a * a;
  }
  return {sum, estimate};
}

void check_hurwitz_args(double s, double q) {
  if (!(q > 0.0)) throw Error(ErrorCode::DomainError, "hurwitz_zeta requires q > 0");
  if (std::abs(s - 1.0) < 1e-12) throw Error(ErrorCode::PoleAtOne, "hurwitz_zeta has a pole at s = 1");
}

// Magnitude against which truncation error is judged; keeps the shift bounded
// near zeros of ζ(·; q).
double hurwitz_scale(double value, double s, double q) { return std::abs(value) + std::pow(q, -s); }

// Smallest power-of-two shift (starting at 16 for s > 0) whose first omitted
// Euler–Maclaurin correction is well below the target.
int choose_shift(double s, double q, double target_rel_err) {
  // Small shifts avoid cancellation among the growing terms when s <= 0.
  int shift = s > 0.0 ? 16 : 1;
  EulerMaclaurin em = hurwitz_em(s, q, shift);
  while (em.tail_estimate > 1e-2 * target_rel_err * hurwitz_scale(em.value, s, q) && shift < 4096) {
    shift *= 2;
    em = hurwitz_em(s, q, shift);
  }
  return shift;
}

}  // namespace

void PrecisionPolicy::validate() const {
  if (!(target_rel_err > 0.0 && target_rel_err <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "target_rel_err must lie in (0, 1e-3]");
  }
  if (max_terms <= 0) throw Error(ErrorCode::InvalidArgument, "max_terms must be positive");
}

Evaluation gamma_upper(double sigma, double x, const PrecisionPolicy& policy) {
  policy.validate();
  if (!(x >= 0.0)) throw Error(ErrorCode::DomainError, "gamma_upper requires x >= 0");
  if (x == 0.0) {
    if (sigma <= 0.0) {
      throw Error(ErrorCode::DivergentIntegral, "Γ(σ, 0) diverges for σ <= 0");
    }
    return {std::tgamma(sigma), false};
  }
  if (std::isinf(x)) return {0.0, false};
  return gamma_upper_impl(sigma, x, policy);
}

double gamma_upper(double sigma, double x) { return gamma_upper(sigma, x, PrecisionPolicy{}).value; }

double gamma_upper_dsigma(double sigma, double x) {
  constexpr double h = 1e-6;
  return (gamma_upper(sigma + h, x) - gamma_upper(sigma - h, x)) / (2.0 * h);
}

double gamma(double x) { return std::tgamma(x); }

double log_gamma(double x) { return std::lgamma(x); }

double erfc(double x) { return std::erfc(x); }

double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "E1 requires x > 0");
  if (x <= 1.0) {
    double term = 1.0;
    double sum = 0.0;
    for (int n = 1; n < 200; ++n) {
      term *= -x / n;
      const double t = -term / n;
      sum += t;
      if (std::abs(t) < kEps * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
  }
  // Continued fraction e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))).
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "digamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  double p = inv2;
  for (int k = 1; k <= 7; ++k) {
    series += kBernoulli[static_cast<std::size_t>(k - 1)] / (2.0 * k) * p;
    p *= inv2;
  }
  return result + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "trigamma requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv2 * inv;
  for (int k = 1; k <= 7; ++k) {
    series += kBernoulli[static_cast<std::size_t>(k - 1)] * p;
    p *= inv2;
  }
  return result + inv + 0.5 * inv2 + series;
}

Evaluation hurwitz_zeta(double s, double q, const PrecisionPolicy& policy) {
  policy.validate();
  check_hurwitz_args(s, q);
  const int shift = choose_shift(s, q, policy.target_rel_err);
  const EulerMaclaurin em = hurwitz_em(s, q, shift);
  return {em.value, em.tail_estimate > policy.target_rel_err * hurwitz_scale(em.value, s, q)};
}

double hurwitz_zeta(double s, double q) { return hurwitz_zeta(s, q, PrecisionPolicy{}).value; }

double hurwitz_zeta_ds(double s, double q) {
  check_hurwitz_args(s, q);
  int shift = s > 0.0 ? 16 : 4;
  EulerMaclaurin em = hurwitz_em_ds(s, q, shift);
  while (em.tail_estimate > 1e-15 * (std::abs(em.value) + std::abs(std::log(q)) * std::pow(q, -s)) &&
         shift < 4096) {
    shift *= 2;
    em = hurwitz_em_ds(s, q, shift);
  }
  return em.value;
}

double hurwitz_zeta_dq(double s, double q) { return -s * hurwitz_zeta(s + 1.0, q); }

double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

double riemann_zeta_ds(double s) { return hurwitz_zeta_ds(s, 1.0); }

double euler_gamma() { return kEulerGamma; }

double stieltjes_gamma1() {
  static double cached = 0.0;
  static std::once_flag once;
  std::call_once(once, [] {
    constexpr int m = 1000;
    long double sum = 0.0L;
    for (int k = 2; k <= m; ++k) sum += std::log(static_cast<long double>(k)) / k;
    const double lm = std::log(static_cast<double>(m));
    double value = static_cast<double>(sum) - 0.5 * lm * lm;
    // Subtract f(m)/2 + Σ B_{2j}/(2j)! f^{(2j-1)}(m) for f(x) = log(x)/x, using
    // f^{(n)}(x) = (-1)^n n! (log x - H_n) / x^{n+1}.
    value -= 0.5 * lm / m;
    double harmonic = 0.0;
    for (int n = 1; n <= 11; ++n) {
      harmonic += 1.0 / n;
      if (n % 2 == 0) continue;
      const int j = (n + 1) / 2;
      const double deriv = -factorial(n) * (lm - harmonic) / std::pow(static_cast<double>(m), n + 1);
      value -= kBernoulli[static_cast<std::size_t>(j - 1)] / factorial(2 * j) * deriv;
    }
    cached = value;
  });
  return cached;
}

}  // namespace periodic::specfun

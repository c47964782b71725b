#include "periodic/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "periodic/error.hpp"
#include "periodic/quadrature.hpp"
#include "periodic/specfun.hpp"

namespace periodic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLatticePointRadius = 1e-13;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }
double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// Γ(a, x) bounded by (x^{a-1} + |a-1| x^{a-2}) e^{-x} once x is past the bulk;
// the exact value (with a small margin) elsewhere.
double gamma_upper_bound(double a, double x) {
  if (x > 2.0 * std::max(1.0, std::abs(a - 1.0)) + 2.0) {
    return (std::pow(x, a - 1.0) + std::abs(a - 1.0) * std::pow(x, a - 2.0)) * std::exp(-x);
  }
  return 1.01 * std::abs(specfun::gamma_upper(a, x));
}

// c_η(s) = (η^{(s-d)/2} - 1)/(s - d) and its s-derivative, stable near s = d.
double split_shift(double s, int d, double eta) {
  const double x = 0.5 * (s - d);
  const double L = std::log(eta);
  if (std::abs(x * L) < 1e-300 || x == 0.0) return 0.5 * L;
  return std::expm1(x * L) / (2.0 * x);
}

double split_shift_ds(double s, int d, double eta) {
  const double x = 0.5 * (s - d);
  const double L = std::log(eta);
  const double y = x * L;
  if (std::abs(y) < 1e-3) return 0.25 * L * L * (0.5 + y / 3.0 + y * y / 8.0 + y * y * y / 30.0);
  return (y * std::exp(y) - std::expm1(y)) / (4.0 * x * x);
}

// Fourier-side coefficient ĉ_η(|w|) for the whole dual lattice (weights in
// the plan are twice this, over a canonical half).
double dual_coefficient(const RadialProfile& p, int d, double k) {
  const double pd = std::pow(kPi, 0.5 * d);
  const double y = kPi * kPi * k * k / p.eta;
  switch (p.kind) {
    case RadialProfile::Kind::riesz: {
      const double b = 0.5 * (d - p.s);
      return pd * std::pow(kPi * k, p.s - d) * specfun::gamma_upper(b, y) / p.gamma_half_s;
    }
    case RadialProfile::Kind::log_riesz: {
      const double b = 0.5 * (d - p.s);
      const double g = specfun::gamma_upper(b, y);
      const double dg = specfun::gamma_upper_dsigma(b, y);
      return 2.0 * pd * std::pow(kPi * k, p.s - d) *
             (std::log(kPi * k) * g - 0.5 * dg - 0.5 * p.digamma_half_s * g) / p.gamma_half_s;
    }
    case RadialProfile::Kind::log:
      return specfun::gamma_upper(0.5 * d, y) / (pd * std::pow(k, d));
    case RadialProfile::Kind::gaussian:
      return 0.0;
  }
  return 0.0;
}

double dual_magnitude_bound(const RadialProfile& p, int d, double k) {
  const double pd = std::pow(kPi, 0.5 * d);
  const double y = kPi * kPi * k * k / p.eta;
  switch (p.kind) {
    case RadialProfile::Kind::riesz: {
      const double b = 0.5 * (d - p.s);
      return pd * std::pow(kPi * k, p.s - d) * gamma_upper_bound(b, y) / p.gamma_half_s;
    }
    case RadialProfile::Kind::log_riesz: {
      const double b = 0.5 * (d - p.s);
      const double g = gamma_upper_bound(b, y);
      // ∂_σ Γ(σ, y) = ∫_y^∞ t^{σ-1} ln t e^{-t} dt is at most ln(y + 1) Γ(σ, y) plus a margin.
      const double dg = 1.01 * std::abs(specfun::gamma_upper_dsigma(b, y)) + std::log1p(y) * g;
      return 2.0 * pd * std::pow(kPi * k, p.s - d) *
             (std::abs(std::log(kPi * k)) * g + 0.5 * dg + 0.5 * std::abs(p.digamma_half_s) * g) /
             std::abs(p.gamma_half_s);
    }
    case RadialProfile::Kind::log:
      return gamma_upper_bound(0.5 * d, y) / (pd * std::pow(k, d));
    case RadialProfile::Kind::gaussian:
      return 0.0;
  }
  return 0.0;
}

double split_constant(const RadialProfile& p, int d) {
  const double pd = std::pow(kPi, 0.5 * d);
  switch (p.kind) {
    case RadialProfile::Kind::riesz:
      return 2.0 * pd * split_shift(p.s, d, p.eta) / p.gamma_half_s;
    case RadialProfile::Kind::log_riesz:
      return 4.0 * pd *
             (split_shift_ds(p.s, d, p.eta) - 0.5 * p.digamma_half_s * split_shift(p.s, d, p.eta)) /
             p.gamma_half_s;
    case RadialProfile::Kind::log:
      return 2.0 * pd / d * (-std::expm1(-0.5 * d * std::log(p.eta)));
    case RadialProfile::Kind::gaussian:
      return p.c < 1.0 ? -pd * std::pow(p.c, -0.5 * d) : 0.0;
  }
  return 0.0;
}

// Decay rate r in exp(-r t^2) of the direct (resp. dual) terms.
double direct_rate(const RadialProfile& p) { return p.kind == RadialProfile::Kind::gaussian ? p.c : p.eta; }
double dual_rate(const RadialProfile& p) { return kPi * kPi / p.eta; }

// Σ over lattice points beyond radius R, estimated as a radial integral
// against the unit-covolume shell density S_d (r + diam)^{d-1}.
template <class F>
double tail_integral(F&& magnitude, int d, double R, double diam, double rate, double tol) {
  const double width = 10.0 / std::sqrt(rate);
  const double area = sphere_area(d);
  auto integrand = [&](double r) { return area * std::pow(r + diam, d - 1) * magnitude(r); };
  auto res = quadrature::integrate(integrand, R, R + width, 1e-3 * tol, 1e-3);
  return std::abs(res.value) + res.abs_err;
}

double direct_tail(const RadialProfile& p, int d, double R, double diam, double tol) {
  if (R <= 0.0) return kInf;
  return tail_integral([&](double r) { return p.magnitude_bound(r); }, d, R, diam, direct_rate(p), tol);
}

double dual_tail(const RadialProfile& p, int d, double K, double diam, double tol) {
  if (p.kind == RadialProfile::Kind::gaussian) return 0.0;
  // ĉ is not monotone near k = 0; start the integral no lower than a small positive radius.
  const double lo = std::max(K, 1e-3);
  return tail_integral([&](double k) { return dual_magnitude_bound(p, d, k); }, d, lo, diam, dual_rate(p), tol);
}

// Smallest radius on a grid of spacing h / sqrt(rate) with tail(R) < target.
template <class F>
double scan_radius(F&& tail, double rate, double target, double floor_radius) {
  const double h = 0.1 / std::sqrt(rate);
  double R = std::max(floor_radius, h);
  for (int i = 0; i < 100000; ++i) {
    if (tail(R) < target) return R;
    R += h;
  }
  throw Error(ErrorCode::UnreachableTolerance, "tail bound does not fall below the requested tolerance");
}

Eigen::VectorXd centered(const Lattice& lattice, const Eigen::VectorXd& q) {
  Eigen::VectorXd f = lattice.inverse_basis() * q;
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = center_fractional(f[i]);
  return lattice.basis() * f;
}

// Picks one of the centered representatives of q and -q by a rule that gives
// the same pick for both, so K(x, y) and K(y, x) agree bitwise. sign is -1
// when the representative of -q was taken.
struct Representative {
  Eigen::VectorXd q;
  double sign = 1.0;
};

Representative canonical(const Lattice& lattice, const Eigen::VectorXd& q) {
  const Eigen::VectorXd raw = lattice.inverse_basis() * q;
  Eigen::VectorXd f(raw.size()), g(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    f[i] = center_fractional(raw[i]);
    g[i] = center_fractional(-raw[i]);
  }
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (f[i] != g[i]) {
      if (f[i] > g[i]) break;
      return {lattice.basis() * g, -1.0};
    }
  }
  return {lattice.basis() * f, 1.0};
}

void check_points(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != lattice.dimension() || y.size() != lattice.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the lattice");
  }
}

void check_plan(const Lattice& lattice, const EwaldPlan& plan) {
  if (plan.dimension != lattice.dimension() || plan.lattice_basis.rows() != lattice.basis().rows() ||
      !(plan.lattice_basis - lattice.basis()).isZero(1e-14)) {
    throw Error(ErrorCode::PlanMismatch, "plan was built for a different lattice");
  }
}

void check_plan(const Lattice& lattice, const EwaldPlan& plan, const PotentialSpec& expected) {
  check_plan(lattice, plan);
  if (!(plan.potential == expected)) {
    throw Error(ErrorCode::PlanMismatch,
                "plan potential " + plan.potential.to_string() + " does not match " + expected.to_string());
  }
}

struct Accumulated {
  double value = 0.0;
  double abs_sum = 0.0;
  bool at_lattice_point = false;
};

Accumulated accumulate(const EwaldPlan& plan, const Eigen::VectorXd& qc, Eigen::VectorXd* gradient) {
  const int d = plan.dimension;
  Accumulated acc;
  if (gradient) gradient->setZero(d);
  if (plan.potential.singular_at_lattice_points() && qc.norm() < kLatticePointRadius) {
    acc.value = kInf;
    acc.at_lattice_point = true;
    return acc;
  }
  const std::size_t nd = plan.direct_count();
  const double* dv = plan.direct_vectors.data();
  std::vector<double> u(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < nd; ++i) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      u[static_cast<std::size_t>(j)] = qc[j] + dv[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
      r2 += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
    }
    const double r = std::sqrt(r2);
    const double phi = plan.profile.value(r);
    acc.value += phi;
    acc.abs_sum += std::abs(phi);
    if (gradient && r > 0.0) {
      const double g = plan.profile.derivative(r) / r;
      for (int j = 0; j < d; ++j) (*gradient)[j] += g * u[static_cast<std::size_t>(j)];
    }
  }
  const std::size_t nw = plan.dual_count();
  const double* wv = plan.dual_vectors.data();
  for (std::size_t i = 0; i < nw; ++i) {
    double phase = 0.0;
    for (int j = 0; j < d; ++j) phase += wv[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] * qc[j];
    phase *= 2.0 * kPi;
    const double w = plan.dual_weights[i];
    acc.value += w * std::cos(phase);
    acc.abs_sum += std::abs(w);
    if (gradient) {
      const double g = -2.0 * kPi * w * std::sin(phase);
      for (int j = 0; j < d; ++j) (*gradient)[j] += g * wv[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    }
  }
  acc.value += plan.constant;
  acc.abs_sum += std::abs(plan.constant);
  return acc;
}

KernelValue to_kernel_value(const EwaldPlan& plan, const Accumulated& acc) {
  KernelValue kv;
  kv.value = acc.value;
  kv.terms_direct = plan.direct_count();
  kv.terms_dual = plan.dual_count();
  kv.abs_err_bound = acc.at_lattice_point
                         ? 0.0
                         : plan.guaranteed_abs_err + 4.0 * std::numeric_limits<double>::epsilon() * acc.abs_sum;
  return kv;
}

void fill_direct(EwaldPlan& plan, const Lattice& lattice, double radius) {
  const auto shells = enumerate_shells(lattice, LatticeSide::direct, radius, true);
  plan.direct_vectors.clear();
  plan.direct_vectors.reserve(shells.size() * static_cast<std::size_t>(plan.dimension));
  for (const auto& v : shells) {
    for (int j = 0; j < plan.dimension; ++j) plan.direct_vectors.push_back(v.cartesian[j]);
  }
}

}  // namespace

RadialProfile RadialProfile::make(const PotentialSpec& potential, double eta) {
  RadialProfile p;
  p.eta = eta;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Riesz>) {
          p.kind = Kind::riesz;
          p.s = f.s;
        } else if constexpr (std::is_same_v<T, LogRiesz>) {
          p.kind = Kind::log_riesz;
          p.s = f.s;
        } else if constexpr (std::is_same_v<T, Log>) {
          p.kind = Kind::log;
        } else {
          p.kind = Kind::gaussian;
          p.c = f.c;
        }
      },
      potential.family());
  if (p.kind == Kind::riesz || p.kind == Kind::log_riesz) {
    p.gamma_half_s = specfun::gamma(0.5 * p.s);
    p.digamma_half_s = specfun::digamma(0.5 * p.s);
  }
  return p;
}

double RadialProfile::value(double r) const {
  switch (kind) {
    case Kind::riesz: {
      const double a = 0.5 * s;
      return specfun::gamma_upper(a, eta * r * r) * std::pow(r, -s) / gamma_half_s;
    }
    case Kind::log_riesz: {
      const double a = 0.5 * s;
      const double x = eta * r * r;
      const double g = specfun::gamma_upper(a, x);
      const double dg = specfun::gamma_upper_dsigma(a, x);
      return 2.0 * std::pow(r, -s) * (0.5 * dg - std::log(r) * g - 0.5 * digamma_half_s * g) / gamma_half_s;
    }
    case Kind::log:
      return specfun::exp_integral_e1(eta * r * r);
    case Kind::gaussian:
      return std::exp(-c * r * r);
  }
  return 0.0;
}

double RadialProfile::derivative(double r) const {
  switch (kind) {
    case Kind::riesz: {
      const double a = 0.5 * s;
      const double x = eta * r * r;
      const double A = -2.0 * std::pow(eta, a) * std::exp(-x) / r -
                       s * specfun::gamma_upper(a, x) * std::pow(r, -s - 1.0);
      return A / gamma_half_s;
    }
    case Kind::log_riesz: {
      const double a = 0.5 * s;
      const double x = eta * r * r;
      const double e = std::exp(-x);
      const double ea = std::pow(eta, a);
      const double g = specfun::gamma_upper(a, x);
      const double half_dg = 0.5 * specfun::gamma_upper_dsigma(a, x);
      const double rs1 = std::pow(r, -s - 1.0);
      const double A = -2.0 * ea * e / r - s * g * rs1;
      const double dA = -ea * std::log(eta) * e / r - g * rs1 - s * half_dg * rs1 + s * g * std::log(r) * rs1;
      return 2.0 * (dA - 0.5 * digamma_half_s * A) / gamma_half_s;
    }
    case Kind::log:
      return -2.0 * std::exp(-eta * r * r) / r;
    case Kind::gaussian:
      return -2.0 * c * r * std::exp(-c * r * r);
  }
  return 0.0;
}

double RadialProfile::magnitude_bound(double r) const {
  switch (kind) {
    case Kind::riesz:
      return gamma_upper_bound(0.5 * s, eta * r * r) * std::pow(r, -s) / std::abs(gamma_half_s);
    case Kind::log_riesz: {
      const double x = eta * r * r;
      const double g = gamma_upper_bound(0.5 * s, x);
      const double dg = 1.01 * std::abs(specfun::gamma_upper_dsigma(0.5 * s, x)) + std::log1p(x) * g;
      return 2.0 * std::pow(r, -s) * (0.5 * dg + std::abs(std::log(r)) * g + 0.5 * std::abs(digamma_half_s) * g) /
             std::abs(gamma_half_s);
    }
    case Kind::log: {
      const double x = eta * r * r;
      return x > 1.0 ? std::exp(-x) / x : 1.01 * specfun::exp_integral_e1(x);
    }
    case Kind::gaussian:
      return std::exp(-c * r * r);
  }
  return 0.0;
}

bool EwaldPlan::tail_bounds_hold() const {
  const double tol = std::max(0.5 * requested_tol, 1e-300);
  const double dt = direct_tail(profile, dimension, real_space_radius, direct_cell_diameter, tol);
  const double kt = dual_count() == 0 && profile.kind == RadialProfile::Kind::gaussian
                        ? 0.0
                        : dual_tail(profile, dimension, k_cut, dual_cell_diameter, tol);
  return dt + kt <= guaranteed_abs_err * (1.0 + 1e-9);
}

nlohmann::json EwaldPlan::to_json() const {
  return {{"potential", potential.to_string()},
          {"dimension", dimension},
          {"eta", eta},
          {"requested_tol", requested_tol},
          {"real_space_radius", real_space_radius},
          {"r_cut", r_cut},
          {"k_cut", k_cut},
          {"direct_tail_bound", direct_tail_bound},
          {"dual_tail_bound", dual_tail_bound},
          {"guaranteed_abs_err", guaranteed_abs_err},
          {"direct_terms", direct_count()},
          {"dual_terms", dual_count()},
          {"constant", constant}};
}

EwaldPlan plan_ewald(const Lattice& lattice, const PotentialSpec& potential, double tol, double eta,
                     const PlanOptions& options) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  const int d = lattice.dimension();
  EwaldPlan plan;
  plan.potential = potential;
  plan.dimension = d;
  plan.lattice_basis = lattice.basis();
  plan.requested_tol = tol;
  plan.profile = RadialProfile::make(potential, eta);
  const bool gaussian = plan.profile.kind == RadialProfile::Kind::gaussian;
  plan.eta = gaussian ? 1.0 : eta;
  plan.profile.eta = plan.eta;
  plan.direct_cell_diameter = lattice.cell_diameter();
  double dual_diam = 0.0;
  for (Eigen::Index i = 0; i < lattice.dual_basis().cols(); ++i) dual_diam += lattice.dual_basis().col(i).norm();
  plan.dual_cell_diameter = dual_diam;

  const double rho = lattice.centered_cell_radius();
  const double half = 0.5 * tol;
  plan.real_space_radius = scan_radius(
      [&](double R) { return direct_tail(plan.profile, d, R, plan.direct_cell_diameter, half); },
      direct_rate(plan.profile), half, 0.0);
  plan.r_cut = std::max(plan.real_space_radius + rho, min_direct_norm(lattice));
  plan.direct_tail_bound = direct_tail(plan.profile, d, plan.real_space_radius, plan.direct_cell_diameter, half);
  if (!gaussian) {
    const double K = scan_radius([&](double k) { return dual_tail(plan.profile, d, k, dual_diam, half); },
                                 dual_rate(plan.profile), half, 0.0);
    plan.k_cut = std::max(K, min_dual_norm(lattice));
    plan.dual_tail_bound = dual_tail(plan.profile, d, plan.k_cut, dual_diam, half);
  }
  plan.guaranteed_abs_err = plan.direct_tail_bound + plan.dual_tail_bound;

  const double estimate = ball_volume(d) * (std::pow(plan.r_cut + rho, d) + (gaussian ? 0.0 : std::pow(plan.k_cut, d)));
  if (estimate > options.shell_budget) {
    throw Error(ErrorCode::UnreachableTolerance,
                "cutoffs for tol " + std::to_string(tol) + " need about " + std::to_string(estimate) +
                    " lattice vectors, above the shell budget");
  }

  fill_direct(plan, lattice, plan.r_cut);
  if (!gaussian) {
    const auto shells = enumerate_shells(lattice, LatticeSide::dual, plan.k_cut, false);
    for (const auto& w : shells) {
      if (!in_canonical_half(w.coords)) continue;
      for (int j = 0; j < d; ++j) plan.dual_vectors.push_back(w.cartesian[j]);
      plan.dual_weights.push_back(2.0 * dual_coefficient(plan.profile, d, w.norm));
    }
  }
  plan.constant = split_constant(plan.profile, d);
  return plan;
}

EwaldPlan plan_direct(const Lattice& lattice, const PotentialSpec& potential, double r_cut) {
  if (!std::holds_alternative<Gaussian>(potential.family())) {
    throw Error(ErrorCode::InvalidArgument, "direct summation needs an absolutely summable potential");
  }
  if (!(r_cut > 0.0)) throw Error(ErrorCode::InvalidArgument, "r_cut must be positive");
  const int d = lattice.dimension();
  EwaldPlan plan;
  plan.potential = potential;
  plan.dimension = d;
  plan.lattice_basis = lattice.basis();
  plan.profile = RadialProfile::make(potential, 1.0);
  plan.direct_cell_diameter = lattice.cell_diameter();
  plan.r_cut = r_cut;
  plan.real_space_radius = std::max(r_cut - lattice.centered_cell_radius(), 0.0);
  plan.direct_tail_bound =
      direct_tail(plan.profile, d, plan.real_space_radius, plan.direct_cell_diameter, 1e-300);
  plan.guaranteed_abs_err = plan.direct_tail_bound;
  plan.requested_tol = plan.guaranteed_abs_err;
  fill_direct(plan, lattice, r_cut);
  plan.constant = split_constant(plan.profile, d);
  return plan;
}

bool KernelValue::is_infinite() const { return std::isinf(value); }

nlohmann::json KernelValue::to_json() const {
  nlohmann::json j;
  if (is_infinite()) {
    j["value"] = "inf";
  } else {
    j["value"] = value;
  }
  j["abs_err_bound"] = abs_err_bound;
  j["terms_direct"] = terms_direct;
  j["terms_dual"] = terms_dual;
  return j;
}

KernelSample sample_kernel(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& q,
                           Eigen::VectorXd* gradient) {
  check_plan(lattice, plan);
  const auto rep = canonical(lattice, q);
  const auto acc = accumulate(plan, rep.q, gradient);
  if (gradient && rep.sign < 0.0) *gradient = -*gradient;
  return {acc.value, acc.at_lattice_point};
}

KernelValue evaluate_kernel(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  check_plan(lattice, plan);
  check_points(lattice, x, y);
  return to_kernel_value(plan, accumulate(plan, canonical(lattice, x - y).q, nullptr));
}

Eigen::VectorXd kernel_gradient(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y) {
  check_plan(lattice, plan);
  check_points(lattice, x, y);
  Eigen::VectorXd g;
  const auto rep = canonical(lattice, x - y);
  const auto acc = accumulate(plan, rep.q, &g);
  if (acc.at_lattice_point) throw Error(ErrorCode::LatticePoint, "gradient undefined at a lattice point");
  return rep.sign * g;
}

KernelValue riesz_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s,
                         const EwaldPlan& plan) {
  check_plan(lattice, plan, PotentialSpec::riesz(s));
  return evaluate_kernel(lattice, plan, x, y);
}

KernelValue logriesz_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s,
                            const EwaldPlan& plan) {
  check_plan(lattice, plan, PotentialSpec::log_riesz(s));
  return evaluate_kernel(lattice, plan, x, y);
}

KernelValue log_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const EwaldPlan& plan) {
  check_plan(lattice, plan, PotentialSpec::log());
  return evaluate_kernel(lattice, plan, x, y);
}

KernelValue coulomb_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const EwaldPlan& plan) {
  if (lattice.dimension() != 3) throw Error(ErrorCode::DimensionMismatch, "Coulomb kernel needs d = 3");
  check_plan(lattice, plan, PotentialSpec::riesz(1.0));
  check_points(lattice, x, y);
  const Eigen::VectorXd q = canonical(lattice, x - y).q;
  KernelValue kv;
  kv.terms_direct = plan.direct_count();
  kv.terms_dual = plan.dual_count();
  if (q.norm() < kLatticePointRadius) {
    kv.value = kInf;
    return kv;
  }
  const double eta = plan.eta;
  const double root_eta = std::sqrt(eta);
  double sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < plan.direct_count(); ++i) {
    const Eigen::Map<const Eigen::Vector3d> v(plan.direct_vectors.data() + 3 * i);
    const double r = (q + v).norm();
    const double t = std::erfc(root_eta * r) / r;
    sum += t;
    abs_sum += t;
  }
  for (std::size_t i = 0; i < plan.dual_count(); ++i) {
    const Eigen::Map<const Eigen::Vector3d> w(plan.dual_vectors.data() + 3 * i);
    const double k2 = w.squaredNorm();
    const double t = 2.0 * std::exp(-kPi * kPi * k2 / eta) / (kPi * k2);
    sum += t * std::cos(2.0 * kPi * w.dot(q));
    abs_sum += t;
  }
  sum += kPi * (1.0 - 1.0 / eta);
  kv.value = sum;
  kv.abs_err_bound = plan.guaranteed_abs_err + 4.0 * std::numeric_limits<double>::epsilon() * abs_sum;
  return kv;
}

KernelValue gaussian_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double c,
                            double r_cut) {
  const auto plan = plan_direct(lattice, PotentialSpec::gaussian(c), r_cut);
  return evaluate_kernel(lattice, plan, x, y);
}

double riesz_shift_constant(int dimension, double s) {
  if (std::abs(s - dimension) < 1e-10) throw Error(ErrorCode::PolePoint, "shift constant has a pole at s = d");
  return 2.0 * std::pow(kPi, 0.5 * dimension) / (specfun::gamma(0.5 * s) * (s - dimension));
}

double epstein_hurwitz_zeta(const Lattice& lattice, const Eigen::VectorXd& q, double s, double tol) {
  if (!(s > 0.0)) throw Error(ErrorCode::DomainError, "s must be positive");
  if (q.size() != lattice.dimension()) throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  const double shift = riesz_shift_constant(lattice.dimension(), s);
  if (centered(lattice, q).norm() < 1e-12) throw Error(ErrorCode::LatticePoint, "q is a lattice vector");
  const auto plan = plan_ewald(lattice, PotentialSpec::riesz(s), tol);
  const auto acc = accumulate(plan, centered(lattice, q), nullptr);
  return acc.value + shift;
}

double epstein_zeta(const Lattice& lattice, double s, double tol) {
  if (!(s > 0.0)) throw Error(ErrorCode::DomainError, "s must be positive");
  const int d = lattice.dimension();
  const double shift = riesz_shift_constant(d, s);
  const auto plan = plan_ewald(lattice, PotentialSpec::riesz(s), tol);
  // Direct terms other than the origin, the whole dual sum at q = 0, and the
  // limit of φ_η(|q|) - |q|^{-s} as q → 0.
  double sum = 0.0;
  for (std::size_t i = 0; i < plan.direct_count(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> v(plan.direct_vectors.data() + static_cast<std::size_t>(d) * i, d);
    const double r = v.norm();
    if (r > 0.0) sum += plan.profile.value(r);
  }
  for (double w : plan.dual_weights) sum += w;
  sum += plan.constant;
  sum -= std::pow(plan.eta, 0.5 * s) / specfun::gamma(0.5 * s + 1.0);
  return sum + shift;
}

std::vector<double> convergence_factor_oracle(const Lattice& lattice, const Eigen::VectorXd& q, double s,
                                              const std::vector<double>& a_sequence) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "s must be positive");
  if (q.size() != lattice.dimension()) throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  const int d = lattice.dimension();
  const Eigen::VectorXd qc = centered(lattice, q);
  if (qc.norm() < kLatticePointRadius) throw Error(ErrorCode::LatticePoint, "q is a lattice vector");
  const double gs = specfun::gamma(0.5 * s);
  const double pd = std::pow(kPi, 0.5 * d);
  std::vector<double> out;
  out.reserve(a_sequence.size());
  for (double a : a_sequence) {
    if (!(a > 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidArgument, "a must lie in (0, 1]");
    // exp(-a^2 r^2) < 1e-20 beyond this radius.
    const double R = std::sqrt(46.0) / a;
    const double r_enum = R + lattice.centered_cell_radius();
    if (ball_volume(d) * std::pow(r_enum, d) > PlanOptions{}.shell_budget) {
      throw Error(ErrorCode::UnreachableTolerance, "convergence factor too small for direct summation");
    }
    const auto shells = enumerate_shells(lattice, LatticeSide::direct, r_enum, true);
    double sum = 0.0;
    for (auto it = shells.size(); it-- > 0;) {
      const double r = (qc + shells[it].cartesian).norm();
      sum += std::pow(r, -s) * std::exp(-a * a * r * r);
    }
    // t = u^{2/s} removes the t^{s/2-1} endpoint singularity.
    const double a2 = a * a;
    auto f = [&](double u) { return pd * std::pow(std::pow(u, 2.0 / s) + a2, -0.5 * d); };
    const auto integral = quadrature::integrate(f, 0.0, 1.0, 1e-13, 1e-15, 20000);
    out.push_back(sum - (2.0 / s) * integral.value / gs);
  }
  return out;
}

}  // namespace periodic

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "periodic/lattice.hpp"
#include "periodic/potential.hpp"

namespace periodic {

/// Short-range radial part φ_η(r) of a split kernel and its r-derivative.
struct RadialProfile {
  enum class Kind { riesz, log_riesz, log, gaussian };
  Kind kind = Kind::riesz;
  double s = 0.0;      // Riesz / log-Riesz exponent
  double c = 0.0;      // Gaussian width
  double eta = 1.0;
  double gamma_half_s = 1.0;    // Γ(s/2)
  double digamma_half_s = 0.0;  // ψ(s/2)

  static RadialProfile make(const PotentialSpec& potential, double eta);

  double value(double r) const;
  double derivative(double r) const;
  /// Upper bound on |φ_η(r)| used by the tail estimates.
  double magnitude_bound(double r) const;
};

/// Truncation plan for the split kernel sums
///
///   K(q) = Σ_{v} φ_η(|q+v|) + Σ_{w ≠ 0} ĉ_η(|w|) cos(2π w·q) + C_η,
///
/// where φ_η carries the short-range part of the Laplace integral (t >= η),
/// ĉ_η the long-range part transformed to the dual lattice (t < η), and C_η
/// moves the split from t = 1 to t = η. Plans are immutable once built.
struct EwaldPlan {
  PotentialSpec potential = PotentialSpec::riesz(1.0);
  int dimension = 0;
  Eigen::MatrixXd lattice_basis;

  double eta = 1.0;
  double requested_tol = 0.0;
  /// Every omitted direct term has |q + v| > real_space_radius.
  double real_space_radius = 0.0;
  /// Radius of the enumerated direct lattice vectors (real_space_radius plus
  /// the centered-cell radius).
  double r_cut = 0.0;
  /// Radius of the enumerated dual vectors.
  double k_cut = 0.0;
  double direct_tail_bound = 0.0;
  double dual_tail_bound = 0.0;
  double guaranteed_abs_err = 0.0;

  /// Direct lattice vectors, shell ordered, flattened row-wise (n × d).
  std::vector<double> direct_vectors;
  /// Canonical half of the nonzero dual vectors with |w| <= k_cut (n × d).
  std::vector<double> dual_vectors;
  /// 2 ĉ_η(|w|) for each entry of dual_vectors.
  std::vector<double> dual_weights;
  double constant = 0.0;
  RadialProfile profile;
  double direct_cell_diameter = 0.0;
  double dual_cell_diameter = 0.0;

  std::size_t direct_count() const { return dimension ? direct_vectors.size() / static_cast<std::size_t>(dimension) : 0; }
  std::size_t dual_count() const { return dimension ? dual_vectors.size() / static_cast<std::size_t>(dimension) : 0; }

  /// Recomputes both tail estimates from the stored radii and compares them
  /// with guaranteed_abs_err.
  bool tail_bounds_hold() const;

  nlohmann::json to_json() const;
};

struct PlanOptions {
  /// Largest number of lattice vectors (direct + dual) a plan may enumerate.
  double shell_budget = 4e6;
};

/// Chooses cutoffs so that each analytically bounded tail is below tol/2.
/// Gaussian potentials are summed directly with an empty dual sum.
/// Throws Error{UnreachableTolerance} when the cutoffs exceed the shell budget.
EwaldPlan plan_ewald(const Lattice& lattice, const PotentialSpec& potential, double tol, double eta = 1.0,
                     const PlanOptions& options = {});

/// Real-space cutoff only: direct sum for a potential with no dual part.
EwaldPlan plan_direct(const Lattice& lattice, const PotentialSpec& potential, double r_cut);

struct KernelValue {
  double value = 0.0;  // +inf at lattice points for singular potentials
  double abs_err_bound = 0.0;
  std::size_t terms_direct = 0;
  std::size_t terms_dual = 0;

  bool is_infinite() const;
  nlohmann::json to_json() const;
};

/// Evaluates K(x, y) for the plan's potential. Points are Cartesian.
KernelValue evaluate_kernel(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y);

/// ∇_x K(x, y) in Cartesian coordinates. Throws Error{LatticePoint} when
/// x - y is a lattice vector and the potential is singular there.
Eigen::VectorXd kernel_gradient(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y);

/// Value and optionally ∇_q K for the Cartesian difference q = x - y.
struct KernelSample {
  double value = 0.0;
  bool at_lattice_point = false;
};
KernelSample sample_kernel(const Lattice& lattice, const EwaldPlan& plan, const Eigen::VectorXd& q,
                           Eigen::VectorXd* gradient = nullptr);

KernelValue riesz_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s,
                         const EwaldPlan& plan);
KernelValue logriesz_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s,
                            const EwaldPlan& plan);
KernelValue log_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const EwaldPlan& plan);

/// Classical erfc form of the three-dimensional Coulomb kernel; the plan must
/// be a Riesz(1) plan on a three-dimensional lattice.
KernelValue coulomb_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const EwaldPlan& plan);

/// Σ_v exp(-c|x-y+v|^2) truncated at r_cut, minus π^{d/2} c^{-d/2} when c < 1
/// (the part of the Laplace measure that sits below the split at t = 1).
KernelValue gaussian_kernel(const Lattice& lattice, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double c,
                            double r_cut);

/// 2π^{d/2} / (Γ(s/2)(s-d)): the configuration-independent gap between the
/// lattice sum Σ_v |q+v|^{-s} (s > d) and the Riesz kernel.
double riesz_shift_constant(int dimension, double s);

/// Continued Epstein–Hurwitz zeta Σ_v |q+v|^{-s}, valid for s > 0, s ≠ d.
/// Throws Error{PolePoint} if |s-d| < 1e-10, Error{LatticePoint} if q ∈ V.
double epstein_hurwitz_zeta(const Lattice& lattice, const Eigen::VectorXd& q, double s, double tol = 1e-13);

/// Continued Epstein zeta Σ_{v≠0} |v|^{-s}, s > 0, s ≠ d.
double epstein_zeta(const Lattice& lattice, double s, double tol = 1e-13);

/// Gaussian-factor renormalized sums
///   Σ_v |q+v|^{-s} e^{-a^2|q+v|^2} - Γ(s/2)^{-1} ∫_0^1 π^{d/2} t^{s/2-1} (t+a^2)^{-d/2} dt
/// for each a. They tend to the Riesz kernel as a → 0.
std::vector<double> convergence_factor_oracle(const Lattice& lattice, const Eigen::VectorXd& q, double s,
                                              const std::vector<double>& a_sequence);

}  // namespace periodic

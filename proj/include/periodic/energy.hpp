#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "periodic/kernel.hpp"
#include "periodic/lattice.hpp"
#include "periodic/potential.hpp"

namespace periodic {

/// N points on the torus R^d / V stored as fractional coordinates in [0,1)^d.
class Configuration {
 public:
  /// Rows of `fractional` are points; coordinates are reduced into [0,1).
  Configuration(const Lattice& lattice, const Eigen::MatrixXd& fractional);
  static Configuration from_cartesian(const Lattice& lattice, const Eigen::MatrixXd& cartesian);

  const Lattice& lattice() const { return lattice_; }
  const Eigen::MatrixXd& points() const { return points_; }
  int size() const { return static_cast<int>(points_.rows()); }
  int dimension() const { return lattice_.dimension(); }
  Eigen::VectorXd cartesian(int i) const;

  nlohmann::json to_json() const;

 private:
  Lattice lattice_;
  Eigen::MatrixXd points_;
};

struct EnergyOptions {
  /// Worker threads for the pair loop; 0 picks the hardware concurrency.
  /// Results do not depend on this value.
  int threads = 1;
};

struct EnergyReport {
  double energy = 0.0;  // +inf for degenerate configurations of singular potentials
  /// ∂E/∂f_j in fractional coordinates (N × d); absent when energy is infinite.
  std::optional<Eigen::MatrixXd> gradient;
  std::vector<std::pair<int, int>> degenerate_pairs;
  nlohmann::json plan;

  nlohmann::json to_json() const;
};

/// E = Σ_{j≠k} K(x_j, x_k), summed as twice the unordered pairs in a fixed order.
EnergyReport total_energy(const Configuration& config, const PotentialSpec& potential, const EwaldPlan& plan,
                          const EnergyOptions& options = {}, bool with_gradient = false);

/// Fractional-coordinate gradient B^T ∂E/∂x_j. Throws Error{DegenerateConfiguration}
/// when two points coincide modulo the lattice and the potential is singular.
Eigen::MatrixXd energy_gradient(const Configuration& config, const PotentialSpec& potential, const EwaldPlan& plan,
                                const EnergyOptions& options = {});

struct MinimizeOptions {
  int restarts = 4;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  double tol_grad = 1e-8;
  /// Accuracy requested from the kernel plan.
  double tol = 1e-12;
  double eta = 1.0;
  /// Use the scaled lattice (the m-th refinement of V) as restart 0 when N = m^d.
  bool lattice_start = true;
  bool record_trajectory = false;
  int threads = 1;
  /// Optional axis-aligned fractional box [lower, upper]^d the points are confined to.
  std::optional<std::pair<double, double>> box;
};

struct RestartOutcome {
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  bool lattice_start = false;
};

struct MinimizeResult {
  Configuration best_config;
  double best_energy = 0.0;
  int best_restart = 0;
  int restarts_used = 0;
  bool converged = false;
  std::vector<RestartOutcome> restarts;
  /// Accepted energies of the winning restart, when recorded.
  std::vector<double> trajectory;
  nlohmann::json plan;

  nlohmann::json to_json() const;
};

/// Projected gradient descent with Armijo backtracking from several starts.
/// Throws Error{InvalidN} for N < 2.
MinimizeResult minimize(const Lattice& lattice, const PotentialSpec& potential, int n,
                        const MinimizeOptions& options = {});

/// Seeded uniform start with no two points closer than 1e-6 (fractional, minimum image).
Eigen::MatrixXd random_start(int n, int dimension, std::uint64_t seed, int restart_index);

/// The m-th refinement of the lattice as fractional points, or nullopt if N is not m^d.
std::optional<Eigen::MatrixXd> lattice_start(int n, int dimension);

struct GrowthRow {
  int n = 0;
  double energy = 0.0;
  double per_n2 = 0.0;
  double per_n_1_plus_s_over_d = 0.0;
  double per_n2_log_n = 0.0;
};

std::vector<GrowthRow> growth_diagnostic(const Lattice& lattice, const PotentialSpec& potential,
                                         const std::vector<int>& n_list, const MinimizeOptions& options = {});

}  // namespace periodic

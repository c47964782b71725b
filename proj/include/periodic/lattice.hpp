#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace periodic {

/// A unit co-volume Bravais lattice V = {Bk : k in Z^d} together with its dual
/// V* = {B^{-T}k}. Construction rescales the raw basis so det(B) = 1.
class Lattice {
 public:
  /// Rescales `raw_basis` (columns are generators) by det^{-1/d}.
  /// Throws Error{DimensionMismatch} for non-square input and
  /// Error{SingularBasis} when |det| < 1e-300.
  static Lattice from_basis(const Eigen::MatrixXd& raw_basis);

  /// Presets: "Z1", "Z2", "Z3", "hex", "fcc-like".
  static Lattice preset(const std::string& name);
  static std::vector<std::string> preset_names();

  int dimension() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& dual_basis() const { return dual_basis_; }
  const Eigen::MatrixXd& inverse_basis() const { return inverse_basis_; }
  /// Uniform factor that was multiplied into the raw basis.
  double scale_applied() const { return scale_applied_; }
  double covolume() const { return covolume_; }

  /// Upper bound on |x| for x with fractional coordinates in [-1/2, 1/2]^d.
  double centered_cell_radius() const { return centered_radius_; }
  /// Length of the longest diagonal of the fundamental cell (an upper bound).
  double cell_diameter() const { return 2.0 * centered_radius_; }

  Eigen::VectorXd to_cartesian(const Eigen::VectorXd& fractional) const;
  Eigen::VectorXd to_fractional(const Eigen::VectorXd& cartesian) const;

  bool same_as(const Lattice& other) const;

  nlohmann::json to_json() const;
  static Lattice from_json(const nlohmann::json& j);

 private:
  Lattice() = default;

  Eigen::MatrixXd basis_;
  Eigen::MatrixXd dual_basis_;
  Eigen::MatrixXd inverse_basis_;
  double scale_applied_ = 1.0;
  double covolume_ = 1.0;
  double centered_radius_ = 0.0;
};

enum class LatticeSide { direct, dual };

struct LatticeVector {
  std::vector<int> coords;  // integer coordinates in the generating basis
  Eigen::VectorXd cartesian;
  double norm = 0.0;
};

/// Shell-ordered enumeration of lattice vectors: non-decreasing norm, ties
/// broken lexicographically on integer coordinates. Enumeration at radius R is
/// a prefix of enumeration at any R' > R.
class ShellIterator {
 public:
  using const_iterator = std::vector<LatticeVector>::const_iterator;

  ShellIterator(const Lattice& lattice, LatticeSide side, double max_radius, bool include_origin);

  const_iterator begin() const { return vectors_.begin(); }
  const_iterator end() const { return vectors_.end(); }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  const LatticeVector& operator[](std::size_t i) const { return vectors_[i]; }
  double max_radius() const { return max_radius_; }

  /// Single-pass consumption.
  bool next(LatticeVector& out);

 private:
  std::vector<LatticeVector> vectors_;
  double max_radius_;
  std::size_t cursor_ = 0;
};

ShellIterator enumerate_shells(const Lattice& lattice, LatticeSide side, double max_radius,
                               bool include_origin = true);

/// Number of lattice points in a ball, without materializing them.
std::size_t count_lattice_points(const Lattice& lattice, LatticeSide side, double max_radius);

/// Maps fractional coordinates into [0,1)^d. Coordinates within 1e-15 of 1
/// snap to 0 so the map is bitwise idempotent.
Eigen::VectorXd reduce_fractional(const Eigen::VectorXd& fractional);
double reduce_fractional(double f);

/// Adds a lattice vector so the fractional coordinates of the result lie in [0,1).
Eigen::VectorXd reduce_to_cell(const Lattice& lattice, const Eigen::VectorXd& x);

/// Fractional coordinates mapped into [-1/2, 1/2).
double center_fractional(double f);

/// Length of the shortest nonzero dual vector.
double min_dual_norm(const Lattice& lattice);
double min_direct_norm(const Lattice& lattice);

/// Canonical half of a centrally symmetric set: first nonzero integer
/// coordinate is positive.
bool in_canonical_half(const std::vector<int>& coords);

}  // namespace periodic

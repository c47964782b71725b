#include "periodic/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "periodic/error.hpp"

namespace periodic {

namespace {

constexpr double kSnapToZero = 1e-15;

// Visits every integer vector k with |k_i| <= bound_i, lexicographic order.
void for_each_in_box(const std::vector<int>& bounds,
                     const std::function<void(const std::vector<int>&)>& visit) {
  const std::size_t d = bounds.size();
  std::vector<int> k(d);
  for (std::size_t i = 0; i < d; ++i) k[i] = -bounds[i];
  while (true) {
    visit(k);
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (k[i] < bounds[i]) {
        ++k[i];
        break;
      }
      k[i] = -bounds[i];
      if (i == 0) return;
    }
    if (d == 0) return;
  }
}

// Side-specific generator matrix and the matrix mapping Cartesian to integer coords.
struct SideMatrices {
  const Eigen::MatrixXd& generators;
  Eigen::MatrixXd to_coords;
};

SideMatrices side_matrices(const Lattice& lattice, LatticeSide side) {
  if (side == LatticeSide::direct) return {lattice.basis(), lattice.inverse_basis()};
  return {lattice.dual_basis(), lattice.basis().transpose()};
}

std::vector<int> box_bounds(const Eigen::MatrixXd& to_coords, double max_radius) {
  std::vector<int> bounds(static_cast<std::size_t>(to_coords.rows()));
  for (Eigen::Index i = 0; i < to_coords.rows(); ++i) {
    const double b = std::floor(to_coords.row(i).norm() * max_radius + 1e-9);
    bounds[static_cast<std::size_t>(i)] = static_cast<int>(b);
  }
  return bounds;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::PoleAtOne: return "PoleAtOne";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::PolePoint: return "PolePoint";
    case ErrorCode::LatticePoint: return "LatticePoint";
    case ErrorCode::UnreachableTolerance: return "UnreachableTolerance";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Lattice Lattice::from_basis(const Eigen::MatrixXd& raw_basis) {
  if (raw_basis.rows() != raw_basis.cols() || raw_basis.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "basis must be a non-empty square matrix, got " +
                                                  std::to_string(raw_basis.rows()) + "x" +
                                                  std::to_string(raw_basis.cols()));
  }
  if (!raw_basis.allFinite()) throw Error(ErrorCode::SingularBasis, "basis has non-finite entries");
  const double det = raw_basis.determinant();
  if (!(std::abs(det) >= 1e-300)) {
    throw Error(ErrorCode::SingularBasis, "basis determinant is zero");
  }
  const auto d = static_cast<double>(raw_basis.rows());
  Lattice lat;
  lat.scale_applied_ = std::pow(std::abs(det), -1.0 / d);
  lat.basis_ = raw_basis * lat.scale_applied_;
  lat.inverse_basis_ = lat.basis_.inverse();
  lat.dual_basis_ = lat.inverse_basis_.transpose();
  lat.covolume_ = std::abs(lat.basis_.determinant());
  lat.centered_radius_ = 0.0;
  for (Eigen::Index i = 0; i < lat.basis_.cols(); ++i) lat.centered_radius_ += 0.5 * lat.basis_.col(i).norm();
  return lat;
}

Lattice Lattice::preset(const std::string& name) {
  if (name == "Z1") return from_basis(Eigen::MatrixXd::Identity(1, 1));
  if (name == "Z2") return from_basis(Eigen::MatrixXd::Identity(2, 2));
  if (name == "Z3") return from_basis(Eigen::MatrixXd::Identity(3, 3));
  if (name == "hex") {
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 0.5,
         0.0, std::sqrt(3.0) / 2.0;
    return from_basis(b);
  }
  if (name == "fcc-like") {
    Eigen::MatrixXd b(3, 3);
    b << 0.0, 1.0, 1.0,
         1.0, 0.0, 1.0,
         1.0, 1.0, 0.0;
    return from_basis(b);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lattice preset '" + name + "'");
}

std::vector<std::string> Lattice::preset_names() { return {"Z1", "Z2", "Z3", "hex", "fcc-like"}; }

Eigen::VectorXd Lattice::to_cartesian(const Eigen::VectorXd& fractional) const {
  if (fractional.size() != basis_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(fractional.size()) +
                                                  ", lattice has " + std::to_string(basis_.cols()));
  }
  return basis_ * fractional;
}

Eigen::VectorXd Lattice::to_fractional(const Eigen::VectorXd& cartesian) const {
  if (cartesian.size() != basis_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(cartesian.size()) +
                                                  ", lattice has " + std::to_string(basis_.cols()));
  }
  return inverse_basis_ * cartesian;
}

bool Lattice::same_as(const Lattice& other) const {
  return basis_.rows() == other.basis_.rows() && basis_ == other.basis_;
}

nlohmann::json Lattice::to_json() const {
  nlohmann::json basis = nlohmann::json::array();
  for (Eigen::Index i = 0; i < basis_.rows(); ++i)
    for (Eigen::Index j = 0; j < basis_.cols(); ++j) basis.push_back(basis_(i, j));
  return {{"dim", dimension()}, {"basis", basis}, {"scale_applied", scale_applied_}};
}

Lattice Lattice::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("basis")) {
    throw Error(ErrorCode::InvalidArgument, "lattice JSON needs a \"basis\" field");
  }
  const auto& jb = j.at("basis");
  std::vector<double> flat;
  if (jb.is_array() && !jb.empty() && jb.front().is_array()) {
    for (const auto& row : jb)
      for (const auto& v : row) flat.push_back(v.get<double>());
  } else {
    flat = jb.get<std::vector<double>>();
  }
  int d = j.contains("dim") ? j.at("dim").get<int>()
                            : static_cast<int>(std::lround(std::sqrt(static_cast<double>(flat.size()))));
  if (d <= 0 || static_cast<std::size_t>(d * d) != flat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "basis has " + std::to_string(flat.size()) +
                                                  " entries, expected dim^2 for dim=" + std::to_string(d));
  }
  Eigen::MatrixXd b(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) b(i, k) = flat[static_cast<std::size_t>(i * d + k)];
  Lattice lat = from_basis(b);
  lat.scale_applied_ *= j.value("scale_applied", 1.0);
  return lat;
}

ShellIterator::ShellIterator(const Lattice& lattice, LatticeSide side, double max_radius,
                             bool include_origin)
    : max_radius_(max_radius) {
  if (!(max_radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "max_radius must be >= 0");
  const auto m = side_matrices(lattice, side);
  const Eigen::Index d = m.generators.cols();
  const double r2max = max_radius * max_radius;
  std::vector<std::pair<double, LatticeVector>> found;
  for_each_in_box(box_bounds(m.to_coords, max_radius), [&](const std::vector<int>& k) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    bool origin = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (k[static_cast<std::size_t>(i)] != 0) {
        origin = false;
        x += static_cast<double>(k[static_cast<std::size_t>(i)]) * m.generators.col(i);
      }
    }
    if (origin && !include_origin) return;
    const double r2 = x.squaredNorm();
    if (r2 > r2max) return;
    found.emplace_back(r2, LatticeVector{k, std::move(x), std::sqrt(r2)});
  });
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second.coords < b.second.coords;
  });
  vectors_.reserve(found.size());
  for (auto& f : found) vectors_.push_back(std::move(f.second));
}

bool ShellIterator::next(LatticeVector& out) {
  if (cursor_ >= vectors_.size()) return false;
  out = vectors_[cursor_++];
  return true;
}

ShellIterator enumerate_shells(const Lattice& lattice, LatticeSide side, double max_radius,
                               bool include_origin) {
  return ShellIterator(lattice, side, max_radius, include_origin);
}

std::size_t count_lattice_points(const Lattice& lattice, LatticeSide side, double max_radius) {
  const auto m = side_matrices(lattice, side);
  const Eigen::Index d = m.generators.cols();
  const double r2max = max_radius * max_radius;
  std::size_t count = 0;
  Eigen::VectorXd x(d);
  for_each_in_box(box_bounds(m.to_coords, max_radius), [&](const std::vector<int>& k) {
    x.setZero();
    for (Eigen::Index i = 0; i < d; ++i) x += static_cast<double>(k[static_cast<std::size_t>(i)]) * m.generators.col(i);
    if (x.squaredNorm() <= r2max) ++count;
  });
  return count;
}

double reduce_fractional(double f) {
  double r = f - std::floor(f);
  if (r >= 1.0 - kSnapToZero) r = 0.0;
  return r;
}

Eigen::VectorXd reduce_fractional(const Eigen::VectorXd& fractional) {
  Eigen::VectorXd out(fractional.size());
  for (Eigen::Index i = 0; i < fractional.size(); ++i) out[i] = reduce_fractional(fractional[i]);
  return out;
}

Eigen::VectorXd reduce_to_cell(const Lattice& lattice, const Eigen::VectorXd& x) {
  return lattice.to_cartesian(reduce_fractional(lattice.to_fractional(x)));
}

double center_fractional(double f) { return f - std::floor(f + 0.5); }

namespace {

double min_nonzero_norm(const Lattice& lattice, LatticeSide side) {
  const auto m = side_matrices(lattice, side);
  double bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.generators.cols(); ++i) bound = std::min(bound, m.generators.col(i).norm());
  const auto shells = enumerate_shells(lattice, side, bound * (1.0 + 1e-12), false);
  return shells.empty() ? bound : shells[0].norm;
}

}  // namespace

double min_dual_norm(const Lattice& lattice) { return min_nonzero_norm(lattice, LatticeSide::dual); }

double min_direct_norm(const Lattice& lattice) { return min_nonzero_norm(lattice, LatticeSide::direct); }

bool in_canonical_half(const std::vector<int>& coords) {
  for (int c : coords) {
    if (c > 0) return true;
    if (c < 0) return false;
  }
  return false;
}

}  // namespace periodic

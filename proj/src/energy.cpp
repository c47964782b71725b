#include "periodic/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <mutex>
#include <thread>

#include "periodic/error.hpp"

namespace periodic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Pairs are reduced in fixed blocks so the sum is independent of the worker count.
constexpr std::size_t kPairBlock = 256;
constexpr double kMinStartSeparation = 1e-6;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct PairIndex {
  int j, k;
};

std::vector<PairIndex> unordered_pairs(int n) {
  std::vector<PairIndex> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) pairs.push_back({j, k});
  return pairs;
}

void check_energy_plan(const Configuration& config, const PotentialSpec& potential, const EwaldPlan& plan) {
  if (!(plan.potential == potential)) {
    throw Error(ErrorCode::PlanMismatch,
                "plan potential " + plan.potential.to_string() + " does not match " + potential.to_string());
  }
  if (plan.dimension != config.dimension()) throw Error(ErrorCode::PlanMismatch, "plan dimension mismatch");
}

double min_image_distance(const Eigen::MatrixXd& pts, int a, int b) {
  double d2 = 0.0;
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    const double diff = center_fractional(pts(a, c) - pts(b, c));
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

void project(Eigen::MatrixXd& pts, const std::optional<std::pair<double, double>>& box) {
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index c = 0; c < pts.cols(); ++c)
      pts(i, c) = box ? std::clamp(pts(i, c), box->first, box->second) : reduce_fractional(pts(i, c));
}

}  // namespace

Configuration::Configuration(const Lattice& lattice, const Eigen::MatrixXd& fractional) : lattice_(lattice) {
  if (fractional.cols() != lattice.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "points have " + std::to_string(fractional.cols()) +
                                                  " coordinates, lattice has dimension " +
                                                  std::to_string(lattice.dimension()));
  }
  if (fractional.rows() < 1) throw Error(ErrorCode::InvalidN, "a configuration needs at least one point");
  points_ = fractional;
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    for (Eigen::Index c = 0; c < points_.cols(); ++c) points_(i, c) = reduce_fractional(points_(i, c));
}

Configuration Configuration::from_cartesian(const Lattice& lattice, const Eigen::MatrixXd& cartesian) {
  return Configuration(lattice, (lattice.inverse_basis() * cartesian.transpose()).transpose());
}

Eigen::VectorXd Configuration::cartesian(int i) const { return lattice_.basis() * points_.row(i).transpose(); }

nlohmann::json Configuration::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < points_.cols(); ++c) row.push_back(points_(i, c));
    pts.push_back(row);
  }
  return {{"lattice", lattice_.to_json()}, {"points", pts}};
}

nlohmann::json EnergyReport::to_json() const {
  nlohmann::json j;
  if (std::isinf(energy)) {
    j["energy"] = "inf";
  } else {
    j["energy"] = energy;
  }
  if (gradient) {
    nlohmann::json g = nlohmann::json::array();
    for (Eigen::Index i = 0; i < gradient->rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < gradient->cols(); ++c) row.push_back((*gradient)(i, c));
      g.push_back(row);
    }
    j["gradient"] = g;
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : degenerate_pairs) pairs.push_back({a, b});
  j["degenerate_pairs"] = pairs;
  j["plan"] = plan;
  return j;
}

EnergyReport total_energy(const Configuration& config, const PotentialSpec& potential, const EwaldPlan& plan,
                          const EnergyOptions& options, bool with_gradient) {
  check_energy_plan(config, potential, plan);
  const int n = config.size();
  const int d = config.dimension();
  const Lattice& lattice = config.lattice();
  const auto pairs = unordered_pairs(n);
  const std::size_t blocks = (pairs.size() + kPairBlock - 1) / kPairBlock;

  std::vector<double> values(pairs.size(), 0.0);
  std::vector<char> degenerate(pairs.size(), 0);
  Eigen::MatrixXd pair_grad;
  if (with_gradient) pair_grad.setZero(static_cast<Eigen::Index>(pairs.size()), d);

  parallel_for(blocks, resolve_threads(options.threads), [&](std::size_t b) {
    Eigen::VectorXd f(d), g(d);
    const std::size_t end = std::min(pairs.size(), (b + 1) * kPairBlock);
    for (std::size_t p = b * kPairBlock; p < end; ++p) {
      for (int c = 0; c < d; ++c) f[c] = center_fractional(config.points()(pairs[p].j, c) - config.points()(pairs[p].k, c));
      const Eigen::VectorXd q = lattice.basis() * f;
      const auto sample = sample_kernel(lattice, plan, q, with_gradient ? &g : nullptr);
      values[p] = sample.value;
      if (sample.at_lattice_point || q.norm() < 1e-13) degenerate[p] = 1;
      if (with_gradient && !sample.at_lattice_point) pair_grad.row(static_cast<Eigen::Index>(p)) = g.transpose();
    }
  });

  EnergyReport report;
  report.plan = plan.to_json();
  double sum = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    sum += values[p];
    if (degenerate[p]) report.degenerate_pairs.emplace_back(pairs[p].j, pairs[p].k);
  }
  const bool infinite = !report.degenerate_pairs.empty() && potential.singular_at_lattice_points();
  report.energy = infinite ? kInf : 2.0 * sum;
  if (with_gradient && !infinite) {
    // Cartesian ∂E/∂x_j, then B^T maps it to fractional coordinates.
    Eigen::MatrixXd cart = Eigen::MatrixXd::Zero(n, d);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto g = pair_grad.row(static_cast<Eigen::Index>(p));
      cart.row(pairs[p].j) += 2.0 * g;
      cart.row(pairs[p].k) -= 2.0 * g;
    }
    report.gradient = cart * lattice.basis();
  }
  return report;
}

Eigen::MatrixXd energy_gradient(const Configuration& config, const PotentialSpec& potential, const EwaldPlan& plan,
                                const EnergyOptions& options) {
  auto report = total_energy(config, potential, plan, options, true);
  if (!report.gradient) {
    throw Error(ErrorCode::DegenerateConfiguration, "points coincide modulo the lattice; gradient undefined");
  }
  return *report.gradient;
}

Eigen::MatrixXd random_start(int n, int dimension, std::uint64_t seed, int restart_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart_index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::MatrixXd pts(n, dimension);
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (int c = 0; c < dimension; ++c) pts(i, c) = uniform(rng);
      bool clear = true;
      for (int k = 0; k < i && clear; ++k) clear = min_image_distance(pts, i, k) >= kMinStartSeparation;
      if (clear) break;
    }
  }
  return pts;
}

std::optional<Eigen::MatrixXd> lattice_start(int n, int dimension) {
  const int m = static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / dimension)));
  long long total = 1;
  for (int c = 0; c < dimension; ++c) total *= m;
  if (m < 1 || total != n) return std::nullopt;
  Eigen::MatrixXd pts(n, dimension);
  for (int i = 0; i < n; ++i) {
    int rest = i;
    for (int c = dimension - 1; c >= 0; --c) {
      pts(i, c) = static_cast<double>(rest % m) / m;
      rest /= m;
    }
  }
  return pts;
}

nlohmann::json MinimizeResult::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : restarts) {
    per.push_back({{"energy", r.energy},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"lattice_start", r.lattice_start}});
  }
  nlohmann::json j = {{"best_energy", best_energy},   {"best_restart", best_restart},
                      {"restarts_used", restarts_used}, {"converged", converged},
                      {"restarts", per},               {"best_config", best_config.to_json()},
                      {"plan", plan}};
  if (!trajectory.empty()) j["trajectory"] = trajectory;
  return j;
}

namespace {

struct Descent {
  Eigen::MatrixXd points;
  RestartOutcome outcome;
  std::vector<double> trajectory;
};

double dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

Descent descend(const Lattice& lattice, const PotentialSpec& potential, const EwaldPlan& plan,
                Eigen::MatrixXd start, const MinimizeOptions& options) {
  const int n = static_cast<int>(start.rows());
  const int d = lattice.dimension();
  const EnergyOptions serial{1};
  project(start, options.box);
  Descent out;
  out.points = start;
  auto report = total_energy(Configuration(lattice, start), potential, plan, serial, true);
  double energy = report.energy;
  Eigen::MatrixXd grad = report.gradient.value_or(Eigen::MatrixXd::Zero(n, d));
  if (options.record_trajectory) out.trajectory.push_back(energy);

  // Largest trial displacement: a quarter of the typical spacing N^{-1/d}.
  const double max_move = 0.25 * std::pow(static_cast<double>(n), -1.0 / d);
  double alpha = 1.0 / (static_cast<double>(n) * n);
  Eigen::MatrixXd prev_points, prev_grad;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (!(gmax >= options.tol_grad)) {
      out.outcome.converged = std::isfinite(energy);
      break;
    }
    if (it > 0) {
      // Barzilai–Borwein trial step from the last accepted move.
      Eigen::MatrixXd sdiff = out.points - prev_points;
      for (Eigen::Index i = 0; i < sdiff.size(); ++i) sdiff.data()[i] = options.box ? sdiff.data()[i] : center_fractional(sdiff.data()[i]);
      const double sy = dot(sdiff, grad - prev_grad);
      if (sy > 0.0) alpha = dot(sdiff, sdiff) / sy;
    }
    alpha = std::min(alpha, max_move / gmax);
    const double g2 = dot(grad, grad);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::MatrixXd trial = out.points - alpha * grad;
      project(trial, options.box);
      auto trial_report = total_energy(Configuration(lattice, trial), potential, plan, serial, true);
      // Near a minimum the Armijo decrease drops below energy round-off; there a
      // step that shrinks the gradient and keeps the energy within round-off is taken.
      const bool armijo = trial_report.energy <= energy - 1e-4 * alpha * g2;
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(energy);
      const bool flat = alpha * g2 < noise && trial_report.energy <= energy + noise && trial_report.gradient &&
                        trial_report.gradient->cwiseAbs().maxCoeff() < gmax;
      if (std::isfinite(trial_report.energy) && (armijo || flat)) {
        prev_points = out.points;
        prev_grad = grad;
        out.points = trial;
        energy = trial_report.energy;
        grad = *trial_report.gradient;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (options.record_trajectory) out.trajectory.push_back(energy);
  }
  if (!out.outcome.converged) out.outcome.converged = std::isfinite(energy) && grad.cwiseAbs().maxCoeff() < options.tol_grad;
  out.outcome.energy = energy;
  out.outcome.iterations = it;
  return out;
}

}  // namespace

MinimizeResult minimize(const Lattice& lattice, const PotentialSpec& potential, int n, const MinimizeOptions& options) {
  if (n < 2) throw Error(ErrorCode::InvalidN, "minimize needs N >= 2");
  if (options.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be at least 1");
  if (options.box && !(options.box->first >= 0.0 && options.box->second <= 1.0 && options.box->first < options.box->second)) {
    throw Error(ErrorCode::InvalidArgument, "box must satisfy 0 <= lower < upper <= 1");
  }
  const int d = lattice.dimension();
  const auto plan = plan_ewald(lattice, potential, options.tol, options.eta);

  std::vector<Eigen::MatrixXd> starts;
  std::vector<bool> structured;
  if (options.lattice_start && !options.box) {
    if (auto pts = lattice_start(n, d)) {
      starts.push_back(*pts);
      structured.push_back(true);
    }
  }
  for (int r = static_cast<int>(starts.size()); r < options.restarts; ++r) {
    Eigen::MatrixXd pts = random_start(n, d, options.seed, r);
    if (options.box) pts = (options.box->first + (options.box->second - options.box->first) * pts.array()).matrix();
    starts.push_back(pts);
    structured.push_back(false);
  }

  std::vector<Descent> runs(starts.size());
  parallel_for(starts.size(), resolve_threads(options.threads),
               [&](std::size_t i) { runs[i] = descend(lattice, potential, plan, starts[i], options); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].outcome.energy < runs[best].outcome.energy) best = i;
  }
  MinimizeResult result{Configuration(lattice, runs[best].points), 0.0, 0, 0, false, {}, {}, {}};
  result.best_energy = runs[best].outcome.energy;
  result.best_restart = static_cast<int>(best);
  result.restarts_used = static_cast<int>(runs.size());
  result.converged = runs[best].outcome.converged;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].outcome.lattice_start = structured[i];
    result.restarts.push_back(runs[i].outcome);
  }
  result.trajectory = std::move(runs[best].trajectory);
  result.plan = plan.to_json();
  return result;
}

std::vector<GrowthRow> growth_diagnostic(const Lattice& lattice, const PotentialSpec& potential,
                                         const std::vector<int>& n_list, const MinimizeOptions& options) {
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw Error(ErrorCode::InvalidArgument, "N list must be increasing");
  }
  const double d = lattice.dimension();
  double s = std::numeric_limits<double>::quiet_NaN();
  if (auto e = potential.exponent()) s = *e;
  if (std::holds_alternative<Log>(potential.family())) s = 0.0;
  std::vector<GrowthRow> rows;
  for (int n : n_list) {
    const auto res = minimize(lattice, potential, n, options);
    const double N = n;
    GrowthRow row;
    row.n = n;
    row.energy = res.best_energy;
    row.per_n2 = res.best_energy / (N * N);
    row.per_n_1_plus_s_over_d = res.best_energy / std::pow(N, 1.0 + s / d);
    row.per_n2_log_n = res.best_energy / (N * N * std::log(N));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace periodic

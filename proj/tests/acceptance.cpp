// Acceptance runner: one PASS/FAIL line per criterion. An optional argument
// selects a single criterion by number.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "periodic/energy.hpp"
#include "periodic/kernel.hpp"
#include "periodic/specfun.hpp"
#include "periodic/validate.hpp"

using namespace periodic;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      lines.push_back("failed: " + what);
    }
  }
  void info(const std::string& what) { lines.push_back(what); }
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Eigen::VectorXd random_point(std::mt19937_64& rng, const Lattice& lat) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd f(lat.dimension());
  for (int c = 0; c < lat.dimension(); ++c) f[c] = u(rng);
  return lat.to_cartesian(f);
}

std::vector<double> sorted_gaps(const Eigen::MatrixXd& pts) {
  std::vector<double> x(pts.data(), pts.data() + pts.rows());
  std::sort(x.begin(), x.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < x.size(); ++i) gaps.push_back(x[i] - x[i - 1]);
  gaps.push_back(1.0 - x.back() + x.front());
  return gaps;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome riesz_1d_law() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0, 3.0}) {
    for (int n = 2; n <= 32; ++n) {
      const double lhs = validate::equally_spaced_energy(n, "riesz:" + std::to_string(s));
      const double rhs = validate::riesz_1d_energy(n, s);
      worst = std::max(worst, rel(lhs, rhs));
      o.require(rel(lhs, rhs) <= 1e-9, fmt("N=%d s=%g rel %.3e", n, s, rel(lhs, rhs)));
    }
  }
  const double elapsed = seconds_since(t0);
  o.info(fmt("124 cases, worst rel err %.2e, %.2f s", worst, elapsed));
  o.require(elapsed < 10.0, fmt("runtime %.1f s exceeds 10 s", elapsed));
  const double alt = validate::riesz_1d_energy_s1_alternative(2);
  o.info(fmt("s=1 uses the continuity limit 2N^2 log N + N(N-1)(2 gamma + psi(1/2)); "
             "the form 2N^2 log N + 2N(N-1) gamma is off by N(N-1)(gamma + 2 log 2), e.g. %.6f vs %.6f at N=2",
             alt, validate::riesz_1d_energy(2, 1.0)));
  return o;
}

Outcome log_1d_law() {
  Outcome o;
  double worst = 0.0;
  for (int n = 2; n <= 32; ++n) {
    const double lhs = validate::equally_spaced_energy(n, "log");
    const double rhs = validate::log_1d_energy(n);
    worst = std::max(worst, rel(lhs, rhs));
    o.require(rel(lhs, rhs) <= 1e-9, fmt("N=%d rel %.3e", n, rel(lhs, rhs)));
  }
  o.info(fmt("31 cases, worst rel err %.2e", worst));
  return o;
}

Outcome logriesz_1d_law() {
  Outcome o;
  double worst = 0.0;
  for (double s : {0.5, 2.0}) {
    for (int n = 2; n <= 16; ++n) {
      const auto r = validate::check_logriesz_1d(n, s, 1e-7);
      worst = std::max(worst, r.rel_err);
      o.require(r.rel_err <= 1e-7, fmt("N=%d s=%g rel %.3e", n, s, r.rel_err));
    }
  }
  o.info(fmt("s in {0.5, 2}: 30 cases, worst rel err %.2e", worst));
  double worst_gap = 0.0;
  for (int n = 2; n <= 16; ++n) {
    for (const auto& r : validate::check_logriesz_1d_s1(n, 1e-5)) {
      const double gap = std::min(r.abs_err, r.rel_err);
      worst_gap = std::max(worst_gap, gap);
      o.require(gap <= 1e-5, fmt("%s gap %.3e flagged for review", r.name.c_str(), gap));
    }
  }
  o.info(fmt("s=1 closed form, kernel sum and s->1 extrapolation: worst pairwise gap %.2e", worst_gap));
  return o;
}

Outcome optimizer_recovers_equal_spacing() {
  Outcome o;
  const auto z1 = Lattice::preset("Z1");
  double worst_gap = 0.0, worst_energy = 0.0;
  int worst_iters = 0;
  for (double s : {0.5, 1.0, 2.0}) {
    const auto pot = PotentialSpec::riesz(s);
    for (int n : {3, 4, 5, 8}) {
      const double exact = validate::riesz_1d_energy(n, s);
      for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        MinimizeOptions opts;
        opts.seed = seed;
        opts.restarts = 1;
        opts.lattice_start = false;
        const auto r = minimize(z1, pot, n, opts);
        double gap_err = 0.0;
        for (double g : sorted_gaps(r.best_config.points())) gap_err = std::max(gap_err, std::abs(g - 1.0 / n));
        const double e_err = rel(r.best_energy, exact);
        worst_gap = std::max(worst_gap, gap_err);
        worst_energy = std::max(worst_energy, e_err);
        worst_iters = std::max(worst_iters, r.restarts.front().iterations);
        o.require(gap_err <= 1e-5, fmt("s=%g N=%d seed=%d gap error %.3e", s, n, static_cast<int>(seed), gap_err));
        o.require(e_err <= 1e-8, fmt("s=%g N=%d seed=%d energy rel err %.3e", s, n, static_cast<int>(seed), e_err));
      }
    }
  }
  o.info(fmt("60 runs, worst gap error %.2e, worst energy rel err %.2e, at most %d iterations", worst_gap,
             worst_energy, worst_iters));
  return o;
}

Outcome n_squared_asymptotics() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  MinimizeOptions opts;
  opts.restarts = 2;
  opts.seed = 1;
  opts.threads = 0;

  const double limit1 = 4.0 * std::sqrt(pi) / specfun::gamma(0.25);
  const auto rows1 = growth_diagnostic(Lattice::preset("Z1"), PotentialSpec::riesz(0.5), {16, 32, 64}, opts);
  std::string table = "d=1 s=1/2 E/N^2:";
  for (const auto& r : rows1) table += fmt(" N=%d %.6f", r.n, r.per_n2);
  o.info(table + fmt(" (limit %.6f)", limit1));
  for (std::size_t i = 1; i < rows1.size(); ++i) {
    o.require(std::abs(rows1[i].per_n2 - limit1) < std::abs(rows1[i - 1].per_n2 - limit1),
              "d=1 sequence does not approach the limit monotonically");
  }
  const double err1 = rel(rows1.back().per_n2, limit1);
  o.require(err1 <= 0.02, fmt("d=1 N=64 E/N^2 is %.1f%% from the limit (2%% required)", 100.0 * err1));
  // The exact minimum is known here, so the remaining gap is a finite-N effect.
  const double exact64 = validate::riesz_1d_energy(64, 0.5) / (64.0 * 64.0);
  o.info(fmt("d=1 N=64 exact minimal E/N^2 %.6f; leading correction 2 zeta(1/2) N^(-1/2) = %.4f", exact64,
             2.0 * specfun::riemann_zeta(0.5) / 8.0));

  const double limit2 = 2.0 * std::sqrt(pi);
  const auto rows2 = growth_diagnostic(Lattice::preset("Z2"), PotentialSpec::riesz(1.0), {9, 16, 25}, opts);
  table = "d=2 s=1 E/N^2:";
  for (const auto& r : rows2) table += fmt(" N=%d %.6f", r.n, r.per_n2);
  o.info(table + fmt(" (limit %.6f)", limit2));
  for (std::size_t i = 1; i < rows2.size(); ++i) {
    o.require(std::abs(rows2[i].per_n2 - limit2) < std::abs(rows2[i - 1].per_n2 - limit2),
              "d=2 sequence does not approach the limit monotonically");
  }
  const double err2 = rel(rows2.back().per_n2, limit2);
  o.require(err2 <= 0.10, fmt("d=2 N=25 E/N^2 is %.1f%% from the limit (10%% required)", 100.0 * err2));
  const double elapsed = seconds_since(t0);
  o.info(fmt("runtime %.1f s", elapsed));
  o.require(elapsed < 120.0, fmt("runtime %.1f s exceeds 2 min", elapsed));
  return o;
}

Outcome poisson_summation() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uw(0.3, 10.0), ux(-2.0, 2.0);
  const std::vector<Lattice> lattices = {Lattice::preset("Z1"), Lattice::preset("Z2"), Lattice::preset("hex")};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto& lat = lattices[static_cast<std::size_t>(i) % lattices.size()];
    Eigen::VectorXd x(lat.dimension());
    for (int c = 0; c < lat.dimension(); ++c) x[c] = ux(rng);
    const double omega = uw(rng);
    const auto r = validate::check_poisson(lat, x, omega, 1e-12);
    worst = std::max(worst, r.abs_err);
    o.require(r.abs_err <= 1e-12, fmt("case %d omega=%g abs err %.3e", i, omega, r.abs_err));
  }
  o.info(fmt("50 cases, worst abs err %.2e", worst));
  return o;
}

Outcome constant_shift() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> us(1.0, 3.0);
  const std::vector<Lattice> lattices = {Lattice::preset("Z1"), Lattice::preset("Z2"), Lattice::preset("hex"),
                                         Lattice::preset("Z3"), Lattice::preset("fcc-like")};
  double worst_rel = 0.0, worst_q = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto& lat = lattices[static_cast<std::size_t>(i) % lattices.size()];
    const double s = lat.dimension() + us(rng);
    const auto a = validate::check_constant_shift(lat, random_point(rng, lat), s);
    const auto b = validate::check_constant_shift(lat, random_point(rng, lat), s);
    const double q_gap = std::abs(a.lhs - b.lhs);
    worst_rel = std::max({worst_rel, a.rel_err, b.rel_err});
    worst_q = std::max(worst_q, q_gap);
    o.require(a.rel_err <= 1e-9 && b.rel_err <= 1e-9,
              fmt("case %d d=%d s=%.3f rel err %.3e", i, lat.dimension(), s, std::max(a.rel_err, b.rel_err)));
    o.require(q_gap <= 1e-10, fmt("case %d d=%d s=%.3f q dependence %.3e", i, lat.dimension(), s, q_gap));
  }
  o.info(fmt("20 cases, worst rel err %.2e, worst q dependence %.2e", worst_rel, worst_q));
  return o;
}

Outcome splitting_invariance() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> us(0.2, 4.0);
  const std::vector<Lattice> lattices = {Lattice::preset("Z1"), Lattice::preset("hex"), Lattice::preset("Z3")};
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const auto& lat = lattices[static_cast<std::size_t>(i) % lattices.size()];
    double s = us(rng);
    while (std::abs(s - lat.dimension()) < 0.05) s = us(rng);
    const Eigen::VectorXd q = random_point(rng, lat);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(lat.dimension());
    std::vector<double> values;
    for (double eta : {0.5, 1.0, 2.0}) {
      const auto plan = plan_ewald(lat, PotentialSpec::riesz(s), 1e-13, eta);
      values.push_back(riesz_kernel(lat, q, zero, s, plan).value);
    }
    const double spread = *std::max_element(values.begin(), values.end()) - *std::min_element(values.begin(), values.end());
    worst = std::max(worst, spread);
    o.require(spread <= 1e-10, fmt("case %d d=%d s=%.3f spread %.3e", i, lat.dimension(), s, spread));
  }
  o.info(fmt("30 cases, worst spread over eta in {0.5, 1, 2}: %.2e", worst));
  return o;
}

Outcome gradient_correctness() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> un(2, 8);
  const std::vector<Lattice> lattices = {Lattice::preset("Z1"), Lattice::preset("Z2"), Lattice::preset("hex")};
  const std::vector<PotentialSpec> potentials = {PotentialSpec::riesz(1.3), PotentialSpec::log_riesz(0.8),
                                                 PotentialSpec::log(), PotentialSpec::gaussian(4.0)};
  double worst = 0.0;
  int components = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& lat = lattices[static_cast<std::size_t>(i) % lattices.size()];
    const auto& pot = potentials[static_cast<std::size_t>(i) % potentials.size()];
    const int d = lat.dimension();
    const int n = un(rng);
    Eigen::MatrixXd pts(n, d);
    for (Eigen::Index k = 0; k < pts.size(); ++k) pts.data()[k] = u(rng);
    const auto plan = plan_ewald(lat, pot, 1e-13);
    const Configuration cfg(lat, pts);
    const Eigen::MatrixXd g = energy_gradient(cfg, pot, plan);
    // Step scaled to the closest pair so the stencil stays well inside the smooth region.
    double closest = INFINITY;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        Eigen::VectorXd f = (pts.row(a) - pts.row(b)).transpose();
        for (int c = 0; c < d; ++c) f[c] = center_fractional(f[c]);
        closest = std::min(closest, (lat.basis() * f).norm());
      }
    }
    const double h = std::min(1e-3, 0.05 * closest);
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < d; ++c) {
        // Central five-point differences at h and h/2, Richardson combined.
        auto at = [&](double t) {
          Eigen::MatrixXd p = pts;
          p(j, c) += t;
          return total_energy(Configuration(lat, p), pot, plan).energy;
        };
        auto stencil = [&](double step) {
          return (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
        };
        const double fd = (16.0 * stencil(0.5 * h) - stencil(h)) / 15.0;
        if (std::abs(g(j, c)) <= 1e-8) continue;
        ++components;
        const double e = rel(g(j, c), fd);
        worst = std::max(worst, e);
        o.require(e <= 1e-6, fmt("case %d %s component (%d,%d) rel err %.3e", i, pot.to_string().c_str(), j, c, e));
      }
    }
  }
  o.info(fmt("50 configurations, %d components, worst rel err %.2e", components, worst));
  return o;
}

Outcome special_functions() {
  Outcome o;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double w_hurwitz = 0.0, w_mult = 0.0, w_gamma = 0.0, w_e1 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double s = -2.0 + 62.0 * u01(rng);
    if (std::abs(s - 1.0) < 1e-3) s += 0.01;
    const double q = 0.01 + 1.99 * u01(rng);
    const double lhs = specfun::hurwitz_zeta(s, q);
    const double rhs = std::pow(q, -s) + specfun::hurwitz_zeta(s, q + 1.0);
    w_hurwitz = std::max(w_hurwitz, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::pow(q, -s), 1e-300}));
  }
  const int ns[] = {2, 3, 5, 8};
  const double ss[] = {0.5, 2.0, 3.7, 6.0};
  for (int i = 0; i < 1000; ++i) {
    const int n = ns[i % 4];
    const double s = i < 16 ? ss[(i / 4) % 4] : 0.1 + 8.0 * u01(rng);
    if (std::abs(s - 1.0) < 1e-3) continue;
    const auto r = validate::check_multiplication(n, s, 1e-10);
    w_mult = std::max(w_mult, std::min(r.rel_err, r.abs_err));
  }
  for (int i = 0; i < 1000; ++i) {
    const double sigma = -3.0 + 33.0 * u01(rng);
    const double x = 1e-6 + 50.0 * u01(rng);
    const double lhs = specfun::gamma_upper(sigma + 1.0, x);
    const double rhs = sigma * specfun::gamma_upper(sigma, x) + std::pow(x, sigma) * std::exp(-x);
    w_gamma = std::max(w_gamma, rel(lhs, rhs));
  }
  for (int i = 0; i < 1000; ++i) {
    const double x = 1e-3 * std::pow(3e4, u01(rng));
    w_e1 = std::max(w_e1, std::abs(specfun::exp_integral_e1(x) - specfun::gamma_upper(0.0, x)));
  }
  o.require(w_hurwitz <= 1e-11, fmt("Hurwitz recurrence worst %.3e", w_hurwitz));
  o.require(w_mult <= 1e-10, fmt("multiplication formula worst %.3e", w_mult));
  o.require(w_gamma <= 1e-11, fmt("incomplete gamma recurrence worst %.3e", w_gamma));
  o.require(w_e1 <= 1e-12, fmt("E1 versus Gamma(0, x) worst %.3e", w_e1));
  o.info(fmt("1000 cases each: Hurwitz %.1e, multiplication %.1e, gamma recurrence %.1e, E1 %.1e", w_hurwitz, w_mult,
             w_gamma, w_e1));
  return o;
}

Outcome convergence_factor() {
  Outcome o;
  const auto z1 = Lattice::preset("Z1");
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, 0.3);
  const std::vector<double> as = {0.2, 0.1, 0.05};
  for (double s : {0.5, 3.0}) {
    const auto plan = plan_ewald(z1, PotentialSpec::riesz(s), 1e-13);
    const double k = riesz_kernel(z1, q, Eigen::VectorXd::Zero(1), s, plan).value;
    const auto values = convergence_factor_oracle(z1, q, s, as);
    std::string row = fmt("s=%g kernel %.10f gaps:", s, k);
    double previous = INFINITY;
    for (std::size_t i = 0; i < as.size(); ++i) {
      const double gap = std::abs(values[i] - k);
      row += fmt(" a=%g %.3e", as[i], gap);
      o.require(gap < previous, fmt("s=%g gap does not shrink at a=%g", s, as[i]));
      previous = gap;
    }
    o.info(row);
    o.require(previous <= 1e-3, fmt("s=%g gap %.3e at a=0.05 exceeds 1e-3", s, previous));
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "exact 1-D Riesz energies", riesz_1d_law},
      {2, "exact 1-D logarithmic energies", log_1d_law},
      {3, "1-D log-Riesz energies and s=1 consistency", logriesz_1d_law},
      {4, "optimizer recovers equally spaced points", optimizer_recovers_equal_spacing},
      {5, "N^2 asymptotic constant", n_squared_asymptotics},
      {6, "Poisson summation", poisson_summation},
      {7, "constant shift between lattice sums and kernel", constant_shift},
      {8, "splitting-parameter invariance", splitting_invariance},
      {9, "gradient against finite differences", gradient_correctness},
      {10, "special-function identities", special_functions},
      {11, "Gaussian convergence factor", convergence_factor},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.lines.push_back(std::string("exception: ") + e.what());
    }
    all_pass = all_pass && o.pass;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title);
    for (const auto& line : o.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}

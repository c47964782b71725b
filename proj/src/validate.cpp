#include "periodic/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "periodic/energy.hpp"
#include "periodic/error.hpp"
#include "periodic/kernel.hpp"
#include "periodic/quadrature.hpp"
#include "periodic/specfun.hpp"

namespace periodic::validate {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrtPi = std::sqrt(kPi);

std::string label(const std::string& base, std::initializer_list<std::pair<const char*, double>> args) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << base << '[';
  bool first = true;
  for (const auto& [k, v] : args) {
    if (!first) os << ',';
    os << k << '=' << v;
    first = false;
  }
  os << ']';
  return os.str();
}

// (f(1+h) + f(1-h))/2 at h and 2h combined to cancel the h² term.
double richardson_at_one(const std::function<double(double)>& f, double h) {
  const double m1 = 0.5 * (f(1.0 + h) + f(1.0 - h));
  const double m2 = 0.5 * (f(1.0 + 2.0 * h) + f(1.0 - 2.0 * h));
  return (4.0 * m1 - m2) / 3.0;
}

double riesz_1d_generic(int n, double s) {
  const double N = n;
  const double z = specfun::riemann_zeta(s);
  return 2.0 * std::pow(N, 1.0 + s) * z - 2.0 * N * z -
         N * (N - 1.0) * 2.0 * kSqrtPi / (specfun::gamma(0.5 * s) * (s - 1.0));
}

double logriesz_1d_generic(int n, double s) {
  const double N = n;
  const double g = specfun::gamma(0.5 * s);
  const double psi = specfun::digamma(0.5 * s);
  return 4.0 * (std::pow(N, 1.0 + s) * std::log(N) * specfun::riemann_zeta(s) +
                specfun::riemann_zeta_ds(s) * N * (std::pow(N, s) - 1.0) +
                kSqrtPi * N * (N - 1.0) * (psi * 0.5 * (s - 1.0) + 1.0) / (g * (s - 1.0) * (s - 1.0)));
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

nlohmann::json CheckResult::to_json() const {
  nlohmann::json j = {{"name", name},         {"lhs", lhs},           {"rhs", rhs},
                      {"abs_err", abs_err},   {"rel_err", rel_err},   {"tolerance", tolerance},
                      {"passed", passed},     {"observation", observation}};
  if (!note.empty()) j["note"] = note;
  return j;
}

CheckResult compare(std::string name, double lhs, double rhs, double tolerance) {
  CheckResult r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  r.rel_err = rhs != 0.0 ? r.abs_err / std::abs(rhs) : r.abs_err;
  r.tolerance = tolerance;
  r.passed = r.abs_err <= tolerance || r.rel_err <= tolerance;
  return r;
}

double riesz_1d_energy(int n, double s) {
  if (n < 1) throw Error(ErrorCode::InvalidN, "N must be positive");
  if (n == 1) return 0.0;
  if (s != 1.0) return riesz_1d_generic(n, s);
  const double N = n;
  return 2.0 * N * N * std::log(N) + N * (N - 1.0) * (2.0 * specfun::euler_gamma() + specfun::digamma(0.5));
}

double riesz_1d_energy_s1_alternative(int n) {
  const double N = n;
  return 2.0 * N * N * std::log(N) + 2.0 * N * (N - 1.0) * specfun::euler_gamma();
}

double logriesz_1d_energy(int n, double s) {
  if (n < 1) throw Error(ErrorCode::InvalidN, "N must be positive");
  if (n == 1) return 0.0;
  if (s != 1.0) return logriesz_1d_generic(n, s);
  const double N = n;
  const double L = N * std::log(N);
  const double psi = specfun::digamma(0.5);
  return 2.0 * L * L + 4.0 * specfun::euler_gamma() * N * N * std::log(N) -
         N * (N - 1.0) * (4.0 * specfun::stieltjes_gamma1() + 0.5 * (psi * psi - specfun::trigamma(0.5)));
}

double log_1d_energy(int n) {
  const double N = n;
  return 2.0 * N * (kSqrtPi * (N - 1.0) - std::log(N));
}

double equally_spaced_energy(int n, const std::string& potential, double tol) {
  const auto lattice = Lattice::preset("Z1");
  const auto pot = PotentialSpec::parse(potential);
  const auto plan = plan_ewald(lattice, pot, tol);
  Eigen::MatrixXd pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = static_cast<double>(i) / n;
  return total_energy(Configuration(lattice, pts), pot, plan).energy;
}

namespace {

std::string riesz_name(double s) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << s;
  return os.str();
}

}  // namespace

CheckResult check_riesz_1d(int n, double s, double tolerance) {
  return compare(label("riesz_1d", {{"N", n}, {"s", s}}), equally_spaced_energy(n, "riesz:" + riesz_name(s)),
                 riesz_1d_energy(n, s), tolerance);
}

CheckResult check_logriesz_1d(int n, double s, double tolerance) {
  return compare(label("logriesz_1d", {{"N", n}, {"s", s}}), equally_spaced_energy(n, "logriesz:" + riesz_name(s)),
                 logriesz_1d_energy(n, s), tolerance);
}

std::vector<CheckResult> check_logriesz_1d_s1(int n, double tolerance) {
  const double closed = logriesz_1d_energy(n, 1.0);
  const double kernel = equally_spaced_energy(n, "logriesz:1");
  const double limit = richardson_at_one([n](double s) { return logriesz_1d_generic(n, s); }, 1e-4);
  std::vector<CheckResult> out;
  out.push_back(compare(label("logriesz_1d_s1_closed_vs_kernel", {{"N", n}}), kernel, closed, tolerance));
  out.push_back(compare(label("logriesz_1d_s1_limit_vs_closed", {{"N", n}}), limit, closed, tolerance));
  out.push_back(compare(label("logriesz_1d_s1_limit_vs_kernel", {{"N", n}}), limit, kernel, tolerance));
  for (auto& r : out) {
    if (!r.passed) r.note = "s = 1 values disagree; flagged for review";
  }
  return out;
}

std::vector<CheckResult> check_riesz_1d_s1(int n, double tolerance) {
  const double closed = riesz_1d_energy(n, 1.0);
  const double kernel = equally_spaced_energy(n, "riesz:1");
  const double limit = richardson_at_one([n](double s) { return riesz_1d_generic(n, s); }, 1e-4);
  std::vector<CheckResult> out;
  out.push_back(compare(label("riesz_1d_s1_closed_vs_kernel", {{"N", n}}), kernel, closed, tolerance));
  // The extrapolation loses about eight digits to cancellation near the pole.
  out.push_back(compare(label("riesz_1d_s1_limit_vs_kernel", {{"N", n}}), limit, kernel, 1e-6));
  auto alt = compare(label("riesz_1d_s1_alternative_constant", {{"N", n}}), riesz_1d_energy_s1_alternative(n),
                     kernel, tolerance);
  alt.observation = true;
  alt.note = alt.passed ? "alternative s = 1 constant agrees"
                        : "constant 2N(N-1)γ differs from the s -> 1 limit by N(N-1)(γ + 2 log 2)";
  out.push_back(alt);
  return out;
}

CheckResult check_log_1d(int n, double tolerance) {
  const double lhs = n == 1 ? 0.0 : equally_spaced_energy(n, "log");
  return compare(label("log_1d", {{"N", n}}), lhs, log_1d_energy(n), tolerance);
}

CheckResult check_multiplication(int n, double s, double tolerance) {
  double lhs = 0.0;
  for (int j = 1; j <= n; ++j) lhs += specfun::hurwitz_zeta(s, static_cast<double>(j) / n);
  return compare(label("multiplication", {{"n", n}, {"s", s}}), lhs,
                 std::pow(static_cast<double>(n), s) * specfun::riemann_zeta(s), tolerance);
}

CheckResult check_poisson(const Lattice& lattice, const Eigen::VectorXd& x, double omega, double tolerance) {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  const int d = lattice.dimension();
  const double pd = std::pow(kPi, 0.5 * d);
  // e^{-45} ≈ 3e-20 bounds every omitted term on either side.
  const double r_cut = std::sqrt(45.0 / omega) + lattice.centered_cell_radius();
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  double lhs = gaussian_kernel(lattice, x, origin, omega, r_cut).value;
  if (omega < 1.0) lhs += pd * std::pow(omega, -0.5 * d);

  double rhs = 0.0;
  const auto dual = enumerate_shells(lattice, LatticeSide::dual, std::sqrt(45.0 * omega) / kPi, true);
  for (auto it = dual.size(); it-- > 0;) {
    const auto& w = dual[it];
    rhs += std::cos(2.0 * kPi * w.cartesian.dot(x)) * std::exp(-kPi * kPi * w.norm * w.norm / omega);
  }
  rhs *= pd * std::pow(omega, -0.5 * d);
  auto r = compare(label("poisson", {{"d", d}, {"omega", omega}}), lhs, rhs, 0.0);
  r.tolerance = tolerance;
  r.passed = r.abs_err <= tolerance;
  return r;
}

double brute_force_lattice_sum(const Lattice& lattice, const Eigen::VectorXd& q, double s, double radius) {
  const int d = lattice.dimension();
  if (!(s > d)) throw Error(ErrorCode::DomainError, "direct lattice sums need s > d");
  const Eigen::MatrixXd& B = lattice.basis();
  const Eigen::MatrixXd& Binv = lattice.inverse_basis();
  Eigen::VectorXd f = Binv * q;
  for (int i = 0; i < d; ++i) f[i] = center_fractional(f[i]);
  const Eigen::VectorXd qc = B * f;

  if (d == 1) {
    // Exact integers up to the radius on each side, then an Euler–Maclaurin tail.
    const double b = B(0, 0);
    const double x0 = qc[0] / b;  // in units of the spacing
    const long long m = static_cast<long long>(std::floor(radius / std::abs(b)));
    long double sum = 0.0L;
    for (long long n = m; n >= -m; --n) {
      const long double r = std::abs((static_cast<long double>(x0) + n) * b);
      sum += std::pow(r, -static_cast<long double>(s));
    }
    auto tail = [&](long double start) {
      // Σ_{k>=0} (start + k|b|)^{-s}
      const long double h = std::abs(b);
      const long double ls = s;
      const long double f0 = std::pow(start, -ls);
      const long double f1 = -ls * std::pow(start, -ls - 1) * h;
      const long double f3 = -ls * (ls + 1) * (ls + 2) * std::pow(start, -ls - 3) * h * h * h;
      return std::pow(start, 1 - ls) / ((ls - 1) * h) + f0 / 2 - f1 / 12 + f3 / 720;
    };
    sum += tail(std::abs((static_cast<long double>(x0) + m + 1) * b));
    sum += tail(std::abs((static_cast<long double>(x0) - m - 1) * b));
    return static_cast<double>(sum);
  }

  // Smooth cutoff: weight 1 inside the radius, a C-infinity step down to 0 at
  // twice the radius. The continuum integral of the removed part is added back;
  // the remaining lattice-minus-integral error decays faster than any power.
  auto bump = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  auto weight = [&](double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double a = bump(2.0 - t), b = bump(t - 1.0);
    return a / (a + b);
  };
  const double outer = 2.0 * radius;
  std::vector<long long> bound(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) bound[static_cast<std::size_t>(i)] = static_cast<long long>(std::ceil(Binv.row(i).norm() * outer)) + 1;
  std::vector<long long> k(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) k[static_cast<std::size_t>(i)] = -bound[static_cast<std::size_t>(i)];
  long double sum = 0.0L;
  const double r2max = outer * outer;
  Eigen::VectorXd v(d);
  while (true) {
    v = qc;
    for (int i = 0; i < d; ++i) v += B.col(i) * static_cast<double>(k[static_cast<std::size_t>(i)]);
    const double r2 = v.squaredNorm();
    if (r2 < r2max && r2 > 0.0) {
      sum += std::pow(static_cast<long double>(r2), -0.5L * s) * weight(std::sqrt(r2) / radius);
    }
    int i = d - 1;
    while (i >= 0) {
      auto& ki = k[static_cast<std::size_t>(i)];
      if (ki < bound[static_cast<std::size_t>(i)]) {
        ++ki;
        break;
      }
      ki = -bound[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
  }
  const double area = 2.0 * std::pow(kPi, 0.5 * d) / specfun::gamma(0.5 * d);
  const auto shell = quadrature::integrate([&](double t) { return std::pow(t, d - 1.0 - s) * (1.0 - weight(t)); }, 1.0,
                                           2.0, 1e-16, 1e-15, 5000);
  const double removed = shell.value + std::pow(2.0, d - s) / (s - d);
  sum += area * std::pow(radius, d - s) * removed;
  return static_cast<double>(sum);
}

CheckResult check_constant_shift(const Lattice& lattice, const Eigen::VectorXd& q, double s, double radius,
                                 double tolerance) {
  const int d = lattice.dimension();
  if (radius <= 0.0) radius = d == 1 ? 1e5 : (d == 2 ? 60.0 : 24.0);
  const double brute = brute_force_lattice_sum(lattice, q, s, radius);
  const auto plan = plan_ewald(lattice, PotentialSpec::riesz(s), 1e-14);
  const double kernel = riesz_kernel(lattice, q, Eigen::VectorXd::Zero(d), s, plan).value;
  return compare(label("constant_shift", {{"d", d}, {"s", s}}), brute - kernel, riesz_shift_constant(d, s),
                 tolerance);
}

CheckResult check_convexity_1d(double s, int grid, double symmetry_tol) {
  if (grid < 4) throw Error(ErrorCode::InvalidArgument, "grid needs at least 4 points");
  const auto lattice = Lattice::preset("Z1");
  const auto plan = plan_ewald(lattice, PotentialSpec::riesz(s), 1e-13);
  std::vector<double> J(static_cast<std::size_t>(grid));
  for (int i = 1; i < grid; ++i) {
    Eigen::VectorXd q(1);
    q << static_cast<double>(i) / grid;
    J[static_cast<std::size_t>(i)] = sample_kernel(lattice, plan, q).value;
  }
  double min_second = std::numeric_limits<double>::infinity();
  for (int i = 2; i + 1 < grid; ++i) {
    const auto u = static_cast<std::size_t>(i);
    min_second = std::min(min_second, J[u - 1] - 2.0 * J[u] + J[u + 1]);
  }
  double asym = 0.0;
  for (int i = 1; i < grid; ++i) {
    const double a = J[static_cast<std::size_t>(i)];
    const double b = J[static_cast<std::size_t>(grid - i)];
    asym = std::max(asym, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  CheckResult r;
  r.name = label("convexity_1d", {{"s", s}, {"grid", grid}});
  r.lhs = min_second;
  r.rhs = 0.0;
  r.abs_err = asym;
  r.rel_err = asym;
  r.tolerance = symmetry_tol;
  r.passed = min_second > 0.0 && asym <= symmetry_tol;
  r.note = "lhs is the smallest second difference; rel_err is the largest relative asymmetry";
  return r;
}

CheckResult observe_hex_vs_square(double s) {
  const double hex = epstein_zeta(Lattice::preset("hex"), s);
  const double square = epstein_zeta(Lattice::preset("Z2"), s);
  CheckResult r;
  r.name = label("hex_vs_square_epstein", {{"s", s}});
  r.lhs = hex;
  r.rhs = square;
  r.abs_err = std::abs(hex - square);
  r.rel_err = r.abs_err / std::abs(square);
  r.passed = hex < square;
  r.observation = true;
  r.note = hex < square ? "hexagonal lattice has the smaller Epstein zeta" : "square lattice has the smaller Epstein zeta";
  return r;
}

std::vector<CheckResult> run_suite(const std::string& suite, int threads) {
  const bool all = suite == "all";
  if (!all && suite != "1d" && suite != "poisson" && suite != "shift" && suite != "specfun") {
    throw Error(ErrorCode::UsageError, "unknown suite '" + suite + "' (expected all, 1d, poisson, shift or specfun)");
  }
  using Task = std::function<std::vector<CheckResult>()>;
  std::vector<Task> tasks;
  auto one = [&](std::function<CheckResult()> f) { tasks.push_back([f] { return std::vector<CheckResult>{f()}; }); };

  if (all || suite == "1d") {
    for (double s : {0.5, 2.0, 3.0})
      for (int n : {2, 3, 5, 8}) one([=] { return check_riesz_1d(n, s); });
    for (int n : {2, 3, 5, 8}) tasks.push_back([=] { return check_riesz_1d_s1(n); });
    for (double s : {0.5, 2.0})
      for (int n : {2, 3, 4}) one([=] { return check_logriesz_1d(n, s); });
    for (int n : {2, 3}) tasks.push_back([=] { return check_logriesz_1d_s1(n); });
    for (int n : {1, 2, 5, 8}) one([=] { return check_log_1d(n); });
    for (double s : {0.5, 2.0}) one([=] { return check_convexity_1d(s, 101); });
  }
  if (all || suite == "poisson") {
    const auto z1 = Lattice::preset("Z1");
    const auto z2 = Lattice::preset("Z2");
    const auto hex = Lattice::preset("hex");
    for (double omega : {0.3, 1.0, kPi, 4.0, 10.0}) {
      one([=] { return check_poisson(z1, Eigen::VectorXd::Constant(1, 0.37), omega); });
      one([=] { return check_poisson(z2, Eigen::Vector2d(0.21, 0.64), omega); });
      one([=] { return check_poisson(hex, Eigen::Vector2d(0.43, -0.18), omega); });
    }
  }
  if (all || suite == "shift") {
    const auto z1 = Lattice::preset("Z1");
    const auto z2 = Lattice::preset("Z2");
    one([=] { return check_constant_shift(z1, Eigen::VectorXd::Constant(1, 0.3), 3.0); });
    one([=] { return check_constant_shift(z1, Eigen::VectorXd::Constant(1, 0.71), 3.0); });
    one([=] { return check_constant_shift(z2, Eigen::Vector2d(0.3, 0.7), 4.0 + 1.0); });
    one([=] { return check_constant_shift(Lattice::preset("hex"), Eigen::Vector2d(0.2, 0.1), 5.5); });
  }
  if (all || suite == "specfun") {
    for (int n : {2, 3, 5, 8})
      for (double s : {0.5, 2.0, 3.7, 6.0}) one([=] { return check_multiplication(n, s); });
    one([] { return check_multiplication(7, 0.6); });
  }
  if (all) {
    for (double s : {3.0, 4.0}) one([=] { return observe_hex_vs_square(s); });
  }

  std::vector<std::vector<CheckResult>> partial(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) { partial[i] = tasks[i](); });
  std::vector<CheckResult> out;
  for (auto& p : partial) out.insert(out.end(), p.begin(), p.end());
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.observation || r.passed; });
}

}  // namespace periodic::validate

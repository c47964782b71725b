#include "periodic/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace periodic::quadrature {

namespace {

constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Segment {
  double a, b, value, err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kNodes[static_cast<std::size_t>(i)];
    const double pair = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[static_cast<std::size_t>(i)] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(i / 2)] * pair;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol, int max_intervals) {
  Result result;
  if (a == b) {
    result.converged = true;
    return result;
  }
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double total_err = first.err;
  result.evaluations = 15;
  int intervals = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  total = 0.0;
  total_err = 0.0;
  std::vector<Segment> segments;
  while (!heap.empty()) {
    segments.push_back(heap.top());
    heap.pop();
  }
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    total += it->value;
    total_err += it->err;
  }
  result.value = total;
  result.abs_err = total_err;
  result.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  return result;
}

}  // namespace periodic::quadrature

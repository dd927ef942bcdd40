#include "freqcache/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <algorithm>

namespace freqcache {

namespace {

// Kronrod 15-point nodes (nonnegative half) and weights, with the embedded
// Gauss 7-point weights on the odd-indexed nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrod[i] * pair;
    if (i % 2 == 1) gauss += kGauss[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol, int max_intervals) {
  if (a == b) return {};
  std::priority_queue<Segment> heap;
  Segment first = kronrod15(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(heap.size()) >= max_intervals)
      throw NumericalError("integrate: accuracy not reached within interval budget");
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) throw NumericalError("integrate: interval underflow");
    const Segment left = kronrod15(f, worst.a, mid);
    const Segment right = kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift accumulated by incremental updates.
  QuadratureResult out;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  return out;
}

double incomplete_beta_tail(double x, double y, double w) {
  if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("incomplete beta: x, y must be > 0");
  if (!(w >= 0.0 && w <= 1.0)) throw std::domain_error("incomplete beta: limit outside [0, 1]");
  if (w == 0.0) return 0.0;

  // Near u = 1 substitute 1 - u = v^(1/y):  int (1 - v^(1/y))^(x-1) dv / y.
  auto upper_part = [&](double width) {
    auto g = [&](double v) { return std::pow(1.0 - std::pow(v, 1.0 / y), x - 1.0); };
    return integrate(g, 0.0, std::pow(width, y), 1e-13).value / y;
  };
  if (w <= 0.5) return upper_part(w);

  // Near u = 0 substitute u = s^(1/x):  int (1 - s^(1/x))^(y-1) ds / x.
  const double z = 1.0 - w;
  auto h = [&](double s) { return std::pow(1.0 - std::pow(s, 1.0 / x), y - 1.0); };
  const double lower = integrate(h, std::pow(z, x), std::pow(0.5, x), 1e-13).value / x;
  return lower + upper_part(0.5);
}

double incomplete_beta_upper(double x, double y, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("incomplete beta: z outside [0, 1]");
  return incomplete_beta_tail(x, y, 1.0 - z);
}

}  // namespace freqcache

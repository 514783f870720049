#include "gpelab/quadrature.hpp"

#include <cmath>
#include <queue>
#include <string>

#include "gpelab/errors.hpp"

namespace gpelab {
namespace {

// (G7, K15) node/weight pair on [-1, 1]; nodes are symmetric, the positive
// half is tabulated. The Gauss rule uses the odd-indexed Kronrod nodes.
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double integral = 0.0;
  double error = 0.0;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment evaluate(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double pair = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  Segment seg;
  seg.a = a;
  seg.b = b;
  seg.integral = half * kronrod;
  seg.error = std::abs(half * (kronrod - gauss));
  return seg;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_intervals) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, abs_tol, max_intervals);

  std::priority_queue<Segment> queue;
  Segment whole = evaluate(f, a, b);
  double total = whole.integral;
  double total_error = whole.error;
  queue.push(whole);

  int intervals = 1;
  while (total_error > abs_tol) {
    if (intervals >= max_intervals || !std::isfinite(total_error)) {
      throw NumericalError(
          "integrate: failed to reach tolerance " + std::to_string(abs_tol) +
          " within " + std::to_string(max_intervals) +
          " intervals (residual error " + std::to_string(total_error) + ")");
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = evaluate(f, worst.a, mid);
    Segment right = evaluate(f, mid, worst.b);
    total += left.integral + right.integral - worst.integral;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++intervals;
  }
  return total;
}

}  // namespace gpelab

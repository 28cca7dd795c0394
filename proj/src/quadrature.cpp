#include "dpdate/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "dpdate/errors.hpp"

namespace dpdate {
namespace {

// QUADPACK qk15 abscissae and weights. Odd indices of kKronrodNodes are the
// 7-point Gauss nodes.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f,
                                double lo, double hi,
                                const QuadratureOptions& options) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::InvalidArgument, "quadrature needs a finite interval lo < hi");
  }
  // A single panel over a wide support can miss a narrow peak entirely and
  // report a tiny error, so start from a uniform partition.
  const int initial = std::max(1, std::min(options.initial_intervals, options.max_intervals));
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double error = 0.0;
  const double width = (hi - lo) / initial;
  for (int i = 0; i < initial; ++i) {
    const double a = lo + width * i;
    const double b = i + 1 == initial ? hi : lo + width * (i + 1);
    Segment s = gk15(f, a, b);
    total += s.value;
    error += s.error;
    heap.push(s);
  }
  int intervals = initial;
  while (error > std::max(options.abs_tol, options.rel_tol * std::fabs(total))) {
    if (intervals >= options.max_intervals) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not reach tolerance on [" << lo << ", "
          << hi << "]; error estimate " << error;
      fail(ErrorCode::QuadratureFailure, msg.str());
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Segment left = gk15(f, worst.lo, mid);
    Segment right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum from the leaves so the running update does not accumulate drift.
  double value = 0.0;
  double abs_error = 0.0;
  std::vector<Segment> leaves;
  leaves.reserve(heap.size());
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(),
            [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
  for (const auto& s : leaves) {
    value += s.value;
    abs_error += s.error;
  }
  return {value, abs_error, intervals};
}

}  // namespace dpdate

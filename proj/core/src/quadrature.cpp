#include "glrsens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "glrsens/errors.hpp"

namespace glrsens {
namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0,
};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694,
};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct PanelWorse {
  bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

Panel kronrod15(const std::function<double(double)>& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = fn(center);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = kWgk[7] * std::fabs(fc);

  double fv1[7];
  double fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = fn(center - dx);
    fv2[j] = fn(center + dx);
    const double fsum = fv1[j] + fv2[j];
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) resg += kWg[(j - 1) / 2] * fsum;
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }

  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * half;
  if (!std::isfinite(p.value)) throw NonFiniteValue("quadrature: integrand produced non-finite value");

  double err = std::fabs((resk - resg) * half);
  resasc *= std::fabs(half);
  resabs *= std::fabs(half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }

  // A jump can hide between a panel edge and the innermost node (all nodes on
  // one side of it), making the node-based estimate blind to the sliver of
  // mass next to the edge. Probe just inside each edge; a zero/nonzero
  // mismatch with the nearest node forces subdivision until the feature is
  // node-visible.
  const double u = (b - a) * 1e-12;
  const double probe_lo = fn(a + u);
  const double probe_hi = fn(b - u);
  const bool mismatch_lo = (probe_lo == 0.0) != (fv1[0] == 0.0);
  const bool mismatch_hi = (probe_hi == 0.0) != (fv2[0] == 0.0);
  if (mismatch_lo || mismatch_hi) {
    const double scale = std::max(std::max(std::fabs(probe_lo), std::fabs(probe_hi)),
                                  std::max(std::fabs(fv1[0]), std::fabs(fv2[0])));
    err = std::max(err, 0.05 * std::fabs(b - a) * scale);
  }

  p.error = err;
  return p;
}

}  // namespace

double integrate_1d(const std::function<double(double)>& fn, double a, double b, double abs_tol,
                    int max_subdivisions, std::span<const double> interior_breaks) {
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw InfiniteBound("integrate_1d: bounds must be finite (cap infinite supports first)");
  }
  if (a == b) return 0.0;

  std::vector<double> edges;
  edges.push_back(a);
  for (double brk : interior_breaks) {
    if (brk > a && brk < b) edges.push_back(brk);
  }
  std::sort(edges.begin(), edges.end());
  edges.push_back(b);
  if (edges.size() == 2) {
    // No caller-provided structure: start from eight equal panels so features
    // narrower than a single Kronrod panel are not missed outright.
    edges.clear();
    for (int i = 0; i <= 8; ++i) edges.push_back(a + (b - a) * (static_cast<double>(i) / 8.0));
  }

  std::priority_queue<Panel, std::vector<Panel>, PanelWorse> heap;
  double total = 0.0;
  double total_err = 0.0;
  int panels = 0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = kronrod15(fn, edges[i], edges[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
    ++panels;
  }

  auto adapt = [&]() {
    while (total_err > abs_tol) {
      if (panels >= max_subdivisions) {
        throw Nonconvergence("integrate_1d: subdivision budget exhausted, error estimate " +
                             std::to_string(total_err));
      }
      Panel worst = heap.top();
      heap.pop();
      if (worst.error <= 0.0) {  // only accumulated rounding residue left
        heap.push(worst);
        break;
      }
      const double mid = 0.5 * (worst.a + worst.b);
      if (mid <= worst.a || mid >= worst.b) {
        // Interval at rounding resolution; accept its current estimate.
        heap.push(Panel{worst.a, worst.b, worst.value, 0.0});
        total_err -= worst.error;
        continue;
      }
      Panel left = kronrod15(fn, worst.a, mid);
      Panel right = kronrod15(fn, mid, worst.b);
      total += left.value + right.value - worst.value;
      total_err += left.error + right.error - worst.error;
      heap.push(left);
      heap.push(right);
      ++panels;
    }
  };
  adapt();

  // The pair-based error estimate can under-report when a discontinuity lines
  // up with the nodes, and such a misestimate can survive one bisection with
  // the value almost unchanged. Forced trisection moves any feature to a
  // fresh alignment, so only results stable under it are accepted.
  for (int round = 0; round < 3; ++round) {
    std::vector<Panel> refined;
    double new_total = 0.0;
    double new_err = 0.0;
    while (!heap.empty()) {
      const Panel p = heap.top();
      heap.pop();
      const double c1 = p.a + (p.b - p.a) / 3.0;
      const double c2 = p.b - (p.b - p.a) / 3.0;
      if (!(p.a < c1 && c1 < c2 && c2 < p.b)) {
        refined.push_back(p);
        new_total += p.value;
        new_err += p.error;
        continue;
      }
      const Panel parts[3] = {kronrod15(fn, p.a, c1), kronrod15(fn, c1, c2),
                              kronrod15(fn, c2, p.b)};
      for (const Panel& part : parts) {
        refined.push_back(part);
        new_total += part.value;
        new_err += part.error;
      }
      panels += 2;
    }
    const double drift = std::fabs(new_total - total);
    for (Panel& p : refined) heap.push(p);
    total = new_total;
    total_err = new_err;
    if (drift <= std::max(4.0 * abs_tol, 1e-14 * std::fabs(new_total))) return total;
    if (panels >= max_subdivisions) {
      throw Nonconvergence("integrate_1d: subdivision budget exhausted during confirmation");
    }
    adapt();
  }
  throw Nonconvergence("integrate_1d: result unstable under refinement");
}

namespace {

double integrate_axis(const std::function<double(const Vec&)>& fn, const Vec& lo, const Vec& hi,
                      double abs_tol, int max_subdivisions,
                      const std::vector<std::vector<double>>* breaks, std::size_t axis,
                      Vec& point) {
  const std::size_t n = lo.size();
  std::span<const double> axis_breaks{};
  if (breaks != nullptr) axis_breaks = (*breaks)[axis];

  auto eval = [&](double x) {
    point[axis] = x;
    if (axis + 1 == n) return fn(point);
    // Inner integrals run at a tighter tolerance so their noise stays below
    // the outer error estimate.
    const double width = hi[axis + 1] - lo[axis + 1];
    const double inner_tol = abs_tol * 0.05 / std::max(1.0, width);
    return integrate_axis(fn, lo, hi, inner_tol, max_subdivisions, breaks, axis + 1, point);
  };
  return integrate_1d(eval, lo[axis], hi[axis], abs_tol, max_subdivisions, axis_breaks);
}

}  // namespace

double integrate_box(const std::function<double(const Vec&)>& fn, const Vec& lo, const Vec& hi,
                     double abs_tol, int max_subdivisions,
                     const std::vector<std::vector<double>>* breaks_per_axis) {
  if (lo.size() != hi.size() || lo.empty()) throw DimensionMismatch("integrate_box: bad bounds");
  if (lo.size() > 3) throw DimensionTooLarge("integrate_box: tensor-product budget is dims <= 3");
  if (breaks_per_axis != nullptr && breaks_per_axis->size() != lo.size()) {
    throw DimensionMismatch("integrate_box: breaks_per_axis size mismatch");
  }
  Vec point(lo.size(), 0.0);
  return integrate_axis(fn, lo, hi, abs_tol, max_subdivisions, breaks_per_axis, 0, point);
}

}  // namespace glrsens

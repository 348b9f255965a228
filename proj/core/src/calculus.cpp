#include "glrsens/calculus.hpp"

#include <cmath>
#include <limits>

namespace glrsens {
namespace {

double step_for(double x, const FDConfig& fd) {
  return std::max(fd.rel_step * std::fabs(x), fd.min_abs_step);
}

}  // namespace

double fd_dtheta(const std::function<double(double)>& fn, double theta, const FDConfig& fd) {
  const double h = step_for(theta, fd);
  const double v = (fn(theta + h) - fn(theta - h)) / (2.0 * h);
  if (!std::isfinite(v)) throw NonFiniteValue("fd_dtheta: non-finite difference quotient");
  return v;
}

Matrix fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, const FDConfig& fd) {
  const int n = static_cast<int>(x.size());
  Vec probe = x;
  Matrix jac(0, 0);
  for (int j = 0; j < n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double h = step_for(x[k], fd);
    probe[k] = x[k] + h;
    const Vec fp = map(probe);
    probe[k] = x[k] - h;
    const Vec fm = map(probe);
    probe[k] = x[k];
    if (fp.size() != fm.size()) throw DimensionMismatch("fd_jacobian: map output size varies");
    if (jac.rows() == 0) jac = Matrix(static_cast<int>(fp.size()), n);
    for (int i = 0; i < jac.rows(); ++i) {
      const double v = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
      if (!std::isfinite(v)) throw NonFiniteValue("fd_jacobian: non-finite difference quotient");
      jac(i, j) = v;
    }
  }
  return jac;
}

double fd_divergence(const std::function<Vec(const Vec&)>& field, const Vec& x, const FDConfig& fd) {
  const int n = static_cast<int>(x.size());
  Vec probe = x;
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double h = step_for(x[k], fd);
    probe[k] = x[k] + h;
    const double fp = field(probe)[k];
    probe[k] = x[k] - h;
    const double fm = field(probe)[k];
    probe[k] = x[k];
    div += (fp - fm) / (2.0 * h);
  }
  if (!std::isfinite(div)) throw NonFiniteValue("fd_divergence: non-finite difference quotient");
  return div;
}

double fd_divergence_in_support(const Problem& p, const std::function<Vec(const Vec&)>& field,
                                const Vec& x, const FDConfig& fd) {
  const int n = p.support.dims;
  Vec probe = x;
  double div = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double h = step_for(x[k], fd);
    // Keep both probes strictly inside the open box; the composite field is
    // only defined on the support.
    const double lo = p.support.lower[k];
    const double hi = p.support.upper[k];
    double room = std::numeric_limits<double>::infinity();
    if (std::isfinite(lo)) room = std::min(room, x[k] - lo);
    if (std::isfinite(hi)) room = std::min(room, hi - x[k]);
    if (room <= 0.0) {
      throw BoundaryEvaluation("divergence weights are undefined on the support boundary");
    }
    h = std::min(h, 0.45 * room);
    probe[k] = x[k] + h;
    const double fp = field(probe)[k];
    probe[k] = x[k] - h;
    const double fm = field(probe)[k];
    probe[k] = x[k];
    div += (fp - fm) / (2.0 * h);
  }
  if (!std::isfinite(div)) throw NonFiniteValue("divergence: non-finite difference quotient");
  return div;
}

Matrix jacobian_of(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  if (p.transform.jacobian) return p.transform.jacobian(x, theta);
  return fd_jacobian([&](const Vec& q) { return p.transform.map(q, theta); }, x, fd);
}

Vec dtheta_of(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  if (p.transform.dtheta) return p.transform.dtheta(x, theta);
  const double h = std::max(fd.rel_step * std::fabs(theta), fd.min_abs_step);
  const Vec fp = p.transform.map(x, theta + h);
  const Vec fm = p.transform.map(x, theta - h);
  Vec out(fp.size(), 0.0);
  for (std::size_t i = 0; i < fp.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
  return out;
}

double density_checked(const Problem& p, const Vec& x, double theta) {
  const double f = p.density.density(x, theta);
  if (!std::isfinite(f)) throw NonFiniteValue("density returned non-finite value");
  if (f <= kDensityFloor) {
    throw ZeroDensity("density below floor at evaluated point (mis-specified support?)");
  }
  return f;
}

Vec velocity(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  Matrix jac = jacobian_of(p, x, theta, fd);
  Vec rhs = dtheta_of(p, x, theta, fd);
  LinearSolve sol = solve_partial_pivot(std::move(jac), std::move(rhs));
  if (sol.rcond < kSingularTol) {
    throw SingularJacobian("transform Jacobian numerically singular (rcond " +
                           std::to_string(sol.rcond) + ")");
  }
  for (double v : sol.x) {
    if (!std::isfinite(v)) throw NonFiniteValue("velocity: non-finite solution component");
  }
  return sol.x;
}

double weight_d(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  const double f = density_checked(p, x, theta);
  auto field = [&](const Vec& q) {
    const double fq = p.density.density(q, theta);
    Vec s = velocity(p, q, theta, fd);
    for (double& v : s) v *= -fq;
    return s;
  };
  return fd_divergence_in_support(p, field, x, fd) / f;
}

double weight_l(const Problem& p, const Vec& x, double theta) {
  density_checked(p, x, theta);
  if (p.density.score) {
    const double l = p.density.score(x, theta);
    if (!std::isfinite(l)) throw NonFiniteValue("score returned non-finite value");
    return l;
  }
  FDConfig fd;
  return fd_dtheta([&](double t) { return std::log(density_checked(p, x, t)); }, theta, fd);
}

SensitivityWeights weights(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  SensitivityWeights w;
  w.s = velocity(p, x, theta, fd);
  w.d = weight_d(p, x, theta, fd);
  w.l = weight_l(p, x, theta);
  return w;
}

}  // namespace glrsens

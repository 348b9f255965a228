#include "glrsens/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glrsens/calculus.hpp"
#include "glrsens/verify.hpp"

namespace glrsens {
namespace {

void check_structure(const Problem& p) {
  const int n = p.support.dims;
  if (n <= 0) throw DimensionMismatch("problem has no dimensions");
  if (p.density.dims != n || p.transform.dims != n || p.performance.dims != n) {
    throw DimensionMismatch("density/transform/performance/support dims disagree");
  }
  if (static_cast<int>(p.support.lower.size()) != n ||
      static_cast<int>(p.support.upper.size()) != n) {
    throw DimensionMismatch("support bound vectors have wrong length");
  }
  if (!p.density.density || !p.transform.map || !p.performance.eval) {
    throw DimensionMismatch("problem is structurally incomplete");
  }
  if (!(std::isfinite(p.theta_interval.lo) && std::isfinite(p.theta_interval.hi) &&
        p.theta_interval.lo < p.theta_interval.hi)) {
    throw DimensionMismatch("parameter interval must be finite with lo < hi");
  }
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteValue(std::string(what) + " returned non-finite value");
  return v;
}

}  // namespace

ValidationReport validate_problem(const Problem& p, int probes, std::uint64_t seed,
                                  const ValidationOptions& opts) {
  check_structure(p);
  if (probes <= 0) throw EmptyInput("validate_problem: need at least one probe");

  const int n = p.support.dims;
  RngStream stream(seed, 0);

  // Probe thetas sit slightly inside the open interval so theta-side
  // differences stay in range.
  const double inset = 1e-3 * p.theta_interval.width();
  auto draw_theta = [&] {
    return p.theta_interval.lo + inset +
           (p.theta_interval.width() - 2.0 * inset) * stream.next_unit();
  };

  ValidationReport report;

  // Density normalization over the (quantile-capped) support.
  {
    CheckResult c;
    c.name = "density_normalization";
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double theta = draw_theta();
      const double mass = density_mass(p, theta);
      worst = std::max(worst, std::fabs(mass - 1.0));
    }
    c.max_residual = worst;
    c.pass = worst <= opts.normalization_tol;
    c.detail = "quadrature of f over the support vs 1";
    report.checks.push_back(c);
  }

  // Probe points: uniform over the support with infinite bounds capped at
  // quantiles holding all but 1e-6 of the mass.
  std::vector<Vec> points;
  std::vector<double> thetas;
  points.reserve(static_cast<std::size_t>(probes));
  for (int k = 0; k < probes; ++k) {
    const double theta = draw_theta();
    const AxisCaps caps = axis_caps(p, theta, 1e-6);
    Vec x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i);
      x[j] = caps.lo[j] + (caps.hi[j] - caps.lo[j]) * stream.next_unit();
    }
    points.push_back(std::move(x));
    thetas.push_back(theta);
  }

  // Score vs central difference of log f in theta.
  {
    CheckResult c;
    c.name = "score_consistency";
    if (!p.density.score) {
      c.pass = true;
      c.detail = "no analytic score; finite-difference fallback in use";
    } else {
      FDConfig fd;
      double worst = 0.0;
      bool ok = true;
      for (int k = 0; k < probes; ++k) {
        const Vec& x = points[static_cast<std::size_t>(k)];
        const double theta = thetas[static_cast<std::size_t>(k)];
        const double analytic = finite_or_throw(p.density.score(x, theta), "score");
        const double fdval = fd_dtheta(
            [&](double t) { return std::log(density_checked(p, x, t)); }, theta, fd);
        const double res = std::fabs(analytic - fdval);
        worst = std::max(worst, res);
        if (res > opts.consistency_tol * (1.0 + std::fabs(fdval))) ok = false;
      }
      c.max_residual = worst;
      c.pass = ok;
      c.detail = "analytic score vs FD of log f in theta";
    }
    report.checks.push_back(c);
  }

  // Jacobian vs finite-difference Jacobian of the map.
  {
    CheckResult c;
    c.name = "jacobian_consistency";
    if (!p.transform.jacobian) {
      c.pass = true;
      c.detail = "no analytic Jacobian; finite-difference fallback in use";
    } else {
      double worst = 0.0;
      bool ok = true;
      for (int k = 0; k < probes; ++k) {
        const Vec& x = points[static_cast<std::size_t>(k)];
        const double theta = thetas[static_cast<std::size_t>(k)];
        const Matrix ja = p.transform.jacobian(x, theta);
        const Matrix jf =
            fd_jacobian([&](const Vec& q) { return p.transform.map(q, theta); }, x);
        double scale = 0.0;
        double res = 0.0;
        for (int r = 0; r < ja.rows(); ++r) {
          for (int col = 0; col < ja.cols(); ++col) {
            finite_or_throw(ja(r, col), "jacobian");
            res = std::max(res, std::fabs(ja(r, col) - jf(r, col)));
            scale = std::max(scale, std::fabs(jf(r, col)));
          }
        }
        worst = std::max(worst, res);
        if (res > opts.consistency_tol * (1.0 + scale)) ok = false;
      }
      c.max_residual = worst;
      c.pass = ok;
      c.detail = "analytic Jacobian vs FD Jacobian of g";
    }
    report.checks.push_back(c);
  }

  // Jacobian invertibility by reciprocal condition estimate.
  {
    CheckResult c;
    c.name = "jacobian_invertibility";
    double min_rcond = std::numeric_limits<double>::infinity();
    for (int k = 0; k < probes; ++k) {
      const Vec& x = points[static_cast<std::size_t>(k)];
      const double theta = thetas[static_cast<std::size_t>(k)];
      Matrix jac = jacobian_of(p, x, theta);
      Vec rhs(static_cast<std::size_t>(n), 0.0);
      rhs[0] = 1.0;
      const LinearSolve sol = solve_partial_pivot(std::move(jac), std::move(rhs));
      min_rcond = std::min(min_rcond, sol.rcond);
    }
    c.max_residual = std::max(0.0, opts.singular_tol - min_rcond);
    c.pass = min_rcond >= opts.singular_tol;
    c.detail = "min reciprocal condition estimate " + std::to_string(min_rcond);
    report.checks.push_back(c);
  }

  // Spatial gradient, only when supplied.
  if (p.density.grad_x) {
    CheckResult c;
    c.name = "grad_x_consistency";
    FDConfig fd;
    double worst = 0.0;
    bool ok = true;
    for (int k = 0; k < probes; ++k) {
      const Vec& x = points[static_cast<std::size_t>(k)];
      const double theta = thetas[static_cast<std::size_t>(k)];
      const Vec ga = p.density.grad_x(x, theta);
      auto scalar_density = [&](const Vec& q) { return Vec{p.density.density(q, theta)}; };
      const Matrix gf = fd_jacobian(scalar_density, x, fd);
      double res = 0.0;
      double scale = 0.0;
      for (int i = 0; i < n; ++i) {
        finite_or_throw(ga[static_cast<std::size_t>(i)], "grad_x");
        res = std::max(res, std::fabs(ga[static_cast<std::size_t>(i)] - gf(0, i)));
        scale = std::max(scale, std::fabs(gf(0, i)));
      }
      worst = std::max(worst, res);
      if (res > opts.consistency_tol * (1.0 + scale)) ok = false;
    }
    c.max_residual = worst;
    c.pass = ok;
    c.detail = "analytic grad_x vs FD gradient of f";
    report.checks.push_back(c);
  }

  return report;
}

}  // namespace glrsens

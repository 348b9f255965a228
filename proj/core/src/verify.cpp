#include "glrsens/verify.hpp"

#include <cmath>
#include <utility>

#include "glrsens/calculus.hpp"

namespace glrsens {
namespace {

// Smallest L (by doubling from the finite anchor) whose marginal mass beyond
// it is at most eps. Used only when the problem registers no tail quantile.
double doubling_upper_cap(const Problem& p, int axis, double theta, double eps,
                          const QuadratureConfig& cfg) {
  if (!p.density.marginal) {
    throw InfiniteBound("infinite bound on axis " + std::to_string(axis) +
                        " needs a tail_quantile or marginal accessor");
  }
  const double anchor = p.support.lower[static_cast<std::size_t>(axis)];
  if (!std::isfinite(anchor)) {
    throw InfiniteBound("axis " + std::to_string(axis) +
                        " is unbounded on both sides; register a tail_quantile");
  }
  auto marg = [&](double v) { return p.density.marginal(axis, v, theta); };
  double span = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mass = integrate_1d(marg, anchor, anchor + span, eps * 0.1, cfg.max_subdivisions);
    if (mass >= 1.0 - eps) return anchor + span;
    span *= 2.0;
  }
  throw Nonconvergence("could not locate a quantile cap on axis " + std::to_string(axis));
}

double doubling_lower_cap(const Problem& p, int axis, double theta, double eps,
                          const QuadratureConfig& cfg) {
  if (!p.density.marginal) {
    throw InfiniteBound("infinite bound on axis " + std::to_string(axis) +
                        " needs a tail_quantile or marginal accessor");
  }
  const double anchor = p.support.upper[static_cast<std::size_t>(axis)];
  if (!std::isfinite(anchor)) {
    throw InfiniteBound("axis " + std::to_string(axis) +
                        " is unbounded on both sides; register a tail_quantile");
  }
  auto marg = [&](double v) { return p.density.marginal(axis, v, theta); };
  double span = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mass = integrate_1d(marg, anchor - span, anchor, eps * 0.1, cfg.max_subdivisions);
    if (mass >= 1.0 - eps) return anchor - span;
    span *= 2.0;
  }
  throw Nonconvergence("could not locate a quantile cap on axis " + std::to_string(axis));
}

// Quantile-spaced interior breakpoints seed the adaptive partition so that
// densities concentrated far from an axis midpoint are still resolved.
std::vector<std::vector<double>> quantile_breaks(const Problem& p, double theta,
                                                 const AxisCaps& caps) {
  std::vector<std::vector<double>> breaks(static_cast<std::size_t>(p.support.dims));
  if (!p.density.tail_quantile) return breaks;
  for (int i = 0; i < p.support.dims; ++i) {
    auto& axis = breaks[static_cast<std::size_t>(i)];
    for (int k = 1; k < 16; ++k) {
      const double q = p.density.tail_quantile(i, static_cast<double>(k) / 16.0, theta);
      const auto idx = static_cast<std::size_t>(i);
      if (std::isfinite(q) && q > caps.lo[idx] && q < caps.hi[idx]) axis.push_back(q);
    }
  }
  return breaks;
}

// Integral of `fn` over one hyperrectangle face (the face coordinate pinned,
// the remaining axes integrated). Zero free axes means a point evaluation.
double integrate_on_face(const std::function<double(const Vec&)>& fn, const Face& face,
                         const AxisCaps& caps, const std::vector<std::vector<double>>& breaks,
                         double abs_tol, int max_subdivisions) {
  const int n = static_cast<int>(caps.lo.size());
  Vec point(static_cast<std::size_t>(n), 0.0);
  point[static_cast<std::size_t>(face.axis)] = face.value;
  if (n == 1) return fn(point);

  Vec lo;
  Vec hi;
  std::vector<std::vector<double>> face_breaks;
  std::vector<int> free_axes;
  for (int i = 0; i < n; ++i) {
    if (i == face.axis) continue;
    free_axes.push_back(i);
    lo.push_back(caps.lo[static_cast<std::size_t>(i)]);
    hi.push_back(caps.hi[static_cast<std::size_t>(i)]);
    face_breaks.push_back(breaks.empty() ? std::vector<double>{}
                                         : breaks[static_cast<std::size_t>(i)]);
  }
  auto wrapped = [&](const Vec& free) {
    Vec x = point;
    for (std::size_t j = 0; j < free_axes.size(); ++j) {
      x[static_cast<std::size_t>(free_axes[j])] = free[j];
    }
    return fn(x);
  };
  return integrate_box(wrapped, lo, hi, abs_tol, max_subdivisions, &face_breaks);
}

// Damped Newton solve of g(x, theta) = y, warm-started at x0.
Vec invert_map(const Problem& p, const Vec& y, double theta, const Vec& x0) {
  auto residual_norm = [&](const Vec& x) {
    const Vec g = p.transform.map(x, theta);
    double r = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, std::fabs(g[i] - y[i]));
    return r;
  };
  Vec x = x0;
  double rnorm = residual_norm(x);
  for (int iter = 0; iter < 60; ++iter) {
    if (rnorm < 1e-12) return x;
    const Vec g = p.transform.map(x, theta);
    Vec rhs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = g[i] - y[i];
    LinearSolve sol = solve_partial_pivot(jacobian_of(p, x, theta), std::move(rhs));
    if (sol.rcond < kSingularTol) {
      throw SingularJacobian("invert_map: Jacobian singular during Newton iteration");
    }
    double damp = 1.0;
    for (int tries = 0; tries < 25; ++tries) {
      Vec cand = x;
      for (std::size_t i = 0; i < x.size(); ++i) cand[i] -= damp * sol.x[i];
      const double cnorm = residual_norm(cand);
      if (cnorm < rnorm) {
        x = std::move(cand);
        rnorm = cnorm;
        break;
      }
      damp *= 0.5;
      if (tries == 24) throw RootFindFailure("invert_map: damping failed to reduce residual");
    }
  }
  throw RootFindFailure("invert_map: no convergence in 60 Newton iterations");
}

double abs_det_jacobian_inverse(const Problem& p, const Vec& x, double theta) {
  const double det = determinant(jacobian_of(p, x, theta));
  if (det == 0.0) throw SingularJacobian("transform Jacobian has zero determinant");
  return 1.0 / std::fabs(det);
}

}  // namespace

AxisCaps axis_caps(const Problem& p, double theta, double eps, const QuadratureConfig& cfg) {
  AxisCaps caps;
  caps.lo = p.support.lower;
  caps.hi = p.support.upper;
  for (int i = 0; i < p.support.dims; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isfinite(caps.lo[k])) {
      caps.lo[k] = p.density.tail_quantile ? p.density.tail_quantile(i, eps, theta)
                                           : doubling_lower_cap(p, i, theta, eps, cfg);
    }
    if (!std::isfinite(caps.hi[k])) {
      caps.hi[k] = p.density.tail_quantile ? p.density.tail_quantile(i, 1.0 - eps, theta)
                                           : doubling_upper_cap(p, i, theta, eps, cfg);
    }
  }
  return caps;
}

double density_mass(const Problem& p, double theta, const QuadratureConfig& cfg) {
  if (p.support.dims > 3) throw DimensionTooLarge("density_mass: dims <= 3");
  const AxisCaps caps = axis_caps(p, theta, cfg.eps_tail, cfg);
  const auto breaks = quantile_breaks(p, theta, caps);
  auto fn = [&](const Vec& x) { return p.density.density(x, theta); };
  return integrate_box(fn, caps.lo, caps.hi, cfg.abs_tol, cfg.max_subdivisions, &breaks);
}

double quadrature_expectation(const Problem& p, double theta, const QuadratureConfig& cfg) {
  if (p.support.dims > 3) throw DimensionTooLarge("quadrature_expectation: dims <= 3");
  const AxisCaps caps = axis_caps(p, theta, cfg.eps_tail, cfg);
  const auto breaks = quantile_breaks(p, theta, caps);
  auto fn = [&](const Vec& x) {
    const double f = p.density.density(x, theta);
    if (f == 0.0) return 0.0;
    return p.performance(p.transform.map(x, theta)) * f;
  };
  return integrate_box(fn, caps.lo, caps.hi, cfg.abs_tol, cfg.max_subdivisions, &breaks);
}

double fd_derivative_oracle(const Problem& p, double theta, double h, const QuadratureConfig& cfg) {
  if (!(p.theta_interval.contains_strict(theta - h) && p.theta_interval.contains_strict(theta + h))) {
    throw Error("fd_derivative_oracle: theta +/- h leaves the parameter interval");
  }
  QuadratureConfig tight = cfg;
  tight.abs_tol = cfg.abs_tol * 0.01;
  const double plus = quadrature_expectation(p, theta + h, tight);
  const double minus = quadrature_expectation(p, theta - h, tight);
  return (plus - minus) / (2.0 * h);
}

IdentityReport glr_identity_check(const Problem& p, double theta, const QuadratureConfig& cfg) {
  if (p.support.dims > 3) throw DimensionTooLarge("glr_identity_check: dims <= 3");
  const AxisCaps caps = axis_caps(p, theta, cfg.eps_tail, cfg);
  const auto breaks = quantile_breaks(p, theta, caps);

  auto interior_fn = [&](const Vec& x) {
    const double f = p.density.density(x, theta);
    if (f <= kDensityFloor) return 0.0;
    const double phi = p.performance(p.transform.map(x, theta));
    if (phi == 0.0) return 0.0;
    return phi * (weight_d(p, x, theta) + weight_l(p, x, theta)) * f;
  };
  IdentityReport rep;
  rep.interior =
      integrate_box(interior_fn, caps.lo, caps.hi, cfg.abs_tol, cfg.max_subdivisions, &breaks);

  for (const Face& face : p.support.finite_faces()) {
    auto flux = [&](const Vec& x) {
      const double f = p.density.density(x, theta);
      if (f == 0.0) return 0.0;
      const double phi = p.performance(p.transform.map(x, theta));
      if (phi == 0.0) return 0.0;
      const Vec s = velocity(p, x, theta);
      return phi * s[static_cast<std::size_t>(face.axis)] * f;
    };
    rep.surface += static_cast<double>(face.side) *
                   integrate_on_face(flux, face, caps, breaks, cfg.abs_tol, cfg.max_subdivisions);
  }

  rep.rhs_total = rep.interior + rep.surface;
  rep.oracle = fd_derivative_oracle(p, theta, 1e-4, cfg);
  rep.residual = std::fabs(rep.rhs_total - rep.oracle);
  return rep;
}

LeibnizReport leibniz_check_1d(const std::function<double(double, double)>& integrand,
                               const std::function<double(double)>& lower, double upper,
                               double theta, double h, const QuadratureConfig& cfg) {
  auto moving_integral = [&](double t) {
    const double a = lower(t);
    if (!(a < upper)) throw EmptyInput("leibniz_check_1d: empty domain");
    return integrate_1d([&](double x) { return integrand(x, t); }, a, upper, cfg.abs_tol * 0.01,
                        cfg.max_subdivisions);
  };

  LeibnizReport rep;
  rep.lhs_fd = (moving_integral(theta + h) - moving_integral(theta - h)) / (2.0 * h);

  const double a = lower(theta);
  auto dtheta_integrand = [&](double x) {
    return (integrand(x, theta + h) - integrand(x, theta - h)) / (2.0 * h);
  };
  const double interior =
      integrate_1d(dtheta_integrand, a, upper, cfg.abs_tol * 0.01, cfg.max_subdivisions);
  const double da = (lower(theta + h) - lower(theta - h)) / (2.0 * h);
  rep.rhs = interior - integrand(a, theta) * da;
  rep.residual = std::fabs(rep.lhs_fd - rep.rhs);
  return rep;
}

LeibnizReport leibniz_check_nd(const Support& u_box, const Transform& phi_map,
                               const std::function<double(const Vec&, double)>& integrand,
                               double theta, double h, const QuadratureConfig& cfg) {
  if (u_box.dims > 2) throw DimensionTooLarge("leibniz_check_nd: dims <= 2");
  if (u_box.has_infinite_bound()) throw InfiniteBound("leibniz_check_nd: needs a finite box");

  auto map_jacobian = [&](const Vec& u, double t) {
    if (phi_map.jacobian) return phi_map.jacobian(u, t);
    return fd_jacobian([&](const Vec& q) { return phi_map.map(q, t); }, u);
  };
  auto map_dtheta = [&](const Vec& u, double t) -> Vec {
    if (phi_map.dtheta) return phi_map.dtheta(u, t);
    FDConfig fd;
    const double step = std::max(fd.rel_step * std::fabs(t), fd.min_abs_step);
    const Vec fp = phi_map.map(u, t + step);
    const Vec fm = phi_map.map(u, t - step);
    Vec out(fp.size());
    for (std::size_t i = 0; i < fp.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * step);
    return out;
  };

  // Pushed-forward integral evaluated in u-space by change of variables.
  auto pushed_integral = [&](double t) {
    auto fn = [&](const Vec& u) {
      const double jac_det = determinant(map_jacobian(u, t));
      return integrand(phi_map.map(u, t), t) * std::fabs(jac_det);
    };
    return integrate_box(fn, u_box.lower, u_box.upper, cfg.abs_tol * 0.01, cfg.max_subdivisions);
  };

  LeibnizReport rep;
  rep.lhs_fd = (pushed_integral(theta + h) - pushed_integral(theta - h)) / (2.0 * h);

  // Interior + divergence form: integral over the image of
  // dtheta_f + div_x(f v), transported back to u-space. The x-divergence is
  // evaluated through the map: div_x(F) = trace(J_phi^{-1} J_{F o phi}).
  auto rhs_fn = [&](const Vec& u) {
    const Matrix ju = map_jacobian(u, theta);
    const double jac_det = determinant(ju);
    if (jac_det == 0.0) throw SingularJacobian("leibniz_check_nd: map Jacobian singular");
    const Vec x = phi_map.map(u, theta);
    const double df = (integrand(x, theta + h) - integrand(x, theta - h)) / (2.0 * h);

    auto composed_field = [&](const Vec& q) -> Vec {
      const Vec xq = phi_map.map(q, theta);
      Vec v = map_dtheta(q, theta);
      const double fq = integrand(xq, theta);
      for (double& c : v) c *= fq;
      return v;
    };
    const Matrix jf = fd_jacobian(composed_field, u);
    double div = 0.0;
    const int n = ju.rows();
    for (int col = 0; col < n; ++col) {
      Vec rhs_col(static_cast<std::size_t>(n));
      for (int row = 0; row < n; ++row) rhs_col[static_cast<std::size_t>(row)] = jf(row, col);
      LinearSolve sol = solve_partial_pivot(ju, std::move(rhs_col));
      if (sol.rcond < kSingularTol) {
        throw SingularJacobian("leibniz_check_nd: map Jacobian numerically singular");
      }
      div += sol.x[static_cast<std::size_t>(col)];
    }
    return (df + div) * std::fabs(jac_det);
  };
  // The divergence integrand carries finite-difference noise around 1e-11, so
  // its quadrature tolerance must not be pushed below that floor.
  rep.rhs = integrate_box(rhs_fn, u_box.lower, u_box.upper, std::max(cfg.abs_tol, 1e-10),
                          cfg.max_subdivisions);
  rep.residual = std::fabs(rep.lhs_fd - rep.rhs);
  return rep;
}

Prop1Report prop1_identity_check(const Problem& p, const Vec& x, double theta, double h,
                                 const QuadratureConfig& cfg) {
  const Vec y0 = p.transform.map(x, theta);
  const std::size_t n = y0.size();

  // Pushed density value f(g^-1(y, t), t) |det J_{g^-1}(y, t)| at fixed y.
  auto pushed_density = [&](const Vec& y, double t) {
    const Vec xt = invert_map(p, y, t, x);
    return p.density.density(xt, t) * abs_det_jacobian_inverse(p, xt, t);
  };

  Prop1Report rep;
  rep.cov1_lhs = (pushed_density(y0, theta + h) - pushed_density(y0, theta - h)) / (2.0 * h);
  rep.cov1_rhs = abs_det_jacobian_inverse(p, x, theta) *
                 (weight_d(p, x, theta) + weight_l(p, x, theta)) * p.density.density(x, theta);
  rep.cov1_residual = std::fabs(rep.cov1_lhs - rep.cov1_rhs);

  // cov2: both sides of the divergence identity averaged over a small y-box.
  const FDConfig fd{h, 1e-8};
  auto lhs_minus_rhs = [&](const Vec& y) {
    auto pushed_field = [&](const Vec& q) -> Vec {
      const Vec xq = invert_map(p, q, theta, x);
      const double scale =
          p.performance(q) * p.density.density(xq, theta) * abs_det_jacobian_inverse(p, xq, theta);
      Vec v = dtheta_of(p, xq, theta);
      for (double& c : v) c *= scale;
      return v;
    };
    const double div_y = fd_divergence(pushed_field, y, fd);

    const Vec xq = invert_map(p, y, theta, x);
    auto x_field = [&](const Vec& q) -> Vec {
      const double scale = p.performance(p.transform.map(q, theta)) * p.density.density(q, theta);
      Vec s = velocity(p, q, theta);
      for (double& c : s) c *= scale;
      return s;
    };
    const double div_x = fd_divergence_in_support(p, x_field, xq, fd);
    return div_y - abs_det_jacobian_inverse(p, xq, theta) * div_x;
  };

  Vec lo(n);
  Vec hi(n);
  double volume = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double half = 0.02 * (1.0 + std::fabs(y0[i]));
    lo[i] = y0[i] - half;
    hi[i] = y0[i] + half;
    volume *= 2.0 * half;
  }
  const double integral =
      integrate_box(lhs_minus_rhs, lo, hi, std::max(cfg.abs_tol, 1e-9), cfg.max_subdivisions);
  rep.cov2_residual = std::fabs(integral / volume);
  return rep;
}

double divergence_theorem_check(const std::function<Vec(const Vec&)>& field, const Support& box,
                                const QuadratureConfig& cfg) {
  if (box.has_infinite_bound()) throw InfiniteBound("divergence_theorem_check: needs a finite box");
  if (box.dims > 3) throw DimensionTooLarge("divergence_theorem_check: dims <= 3");

  auto div_fn = [&](const Vec& x) { return fd_divergence(field, x); };
  const double volume_integral =
      integrate_box(div_fn, box.lower, box.upper, cfg.abs_tol, cfg.max_subdivisions);

  AxisCaps caps{box.lower, box.upper};
  double flux = 0.0;
  for (const Face& face : box.finite_faces()) {
    auto fn = [&](const Vec& x) { return field(x)[static_cast<std::size_t>(face.axis)]; };
    flux += static_cast<double>(face.side) *
            integrate_on_face(fn, face, caps, {}, cfg.abs_tol, cfg.max_subdivisions);
  }
  return std::fabs(volume_integral - flux);
}

}  // namespace glrsens

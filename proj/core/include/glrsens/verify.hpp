#pragma once

#include <functional>

#include "glrsens/model.hpp"
#include "glrsens/quadrature.hpp"

namespace glrsens {

// Per-axis integration limits with infinite bounds replaced by quantile caps
// carrying eps mass per truncated side.
struct AxisCaps {
  Vec lo;
  Vec hi;
};

AxisCaps axis_caps(const Problem& p, double theta, double eps, const QuadratureConfig& cfg = {});

// Quadrature of the density over the (truncated) support; 1 for a well-formed
// problem.
double density_mass(const Problem& p, double theta, const QuadratureConfig& cfg = {});

// E(phi(g(X, theta))) by tensor-product adaptive quadrature in x-space.
// Supports dims <= 3.
double quadrature_expectation(const Problem& p, double theta, const QuadratureConfig& cfg = {});

// Central difference of quadrature_expectation: the deterministic oracle for
// d/dtheta E used to certify the stochastic estimators.
double fd_derivative_oracle(const Problem& p, double theta, double h = 1e-4,
                            const QuadratureConfig& cfg = {});

struct IdentityReport {
  double interior = 0.0;  // quadrature of phi(g)(d+l) f over the support
  double surface = 0.0;   // face sums of phi(g) s^T n f
  double rhs_total = 0.0;
  double oracle = 0.0;    // fd_derivative_oracle
  double residual = 0.0;  // |rhs_total - oracle|
};

// Checks that interior + surface integrals reproduce the derivative oracle.
IdentityReport glr_identity_check(const Problem& p, double theta, const QuadratureConfig& cfg = {});

struct LeibnizReport {
  double lhs_fd = 0.0;  // FD in theta of the moving-domain integral
  double rhs = 0.0;     // interior derivative term +/- boundary flux
  double residual = 0.0;
};

// d/dtheta of integral_{a(theta)}^{upper} f(x, theta) dx versus
// integral of dtheta_f minus f(a(theta), theta) a'(theta).
LeibnizReport leibniz_check_1d(const std::function<double(double, double)>& integrand,
                               const std::function<double(double)>& lower, double upper,
                               double theta, double h = 1e-4, const QuadratureConfig& cfg = {});

// n-dimensional transport check on a moving image phi_map(U, theta):
// FD in theta of the pushed-forward integral versus the interior + divergence
// form, both evaluated in u-space (dims <= 2).
LeibnizReport leibniz_check_nd(const Support& u_box, const Transform& phi_map,
                               const std::function<double(const Vec&, double)>& integrand,
                               double theta, double h = 1e-4, const QuadratureConfig& cfg = {});

struct Prop1Report {
  double cov1_lhs = 0.0;
  double cov1_rhs = 0.0;
  double cov1_residual = 0.0;
  double cov2_residual = 0.0;
};

// Change-of-variables identities behind the weights, checked numerically at
// y = g(x, theta): the theta-derivative of the pushed density (cov1) and the
// divergence identity averaged over a small y-box (cov2). The local inverse
// g^-1 is recovered by damped Newton iteration warm-started at x.
Prop1Report prop1_identity_check(const Problem& p, const Vec& x, double theta, double h = 1e-5,
                                 const QuadratureConfig& cfg = {});

// |integral of div F over the box - total boundary flux| for a smooth field.
double divergence_theorem_check(const std::function<Vec(const Vec&)>& field, const Support& box,
                                const QuadratureConfig& cfg = {});

}  // namespace glrsens

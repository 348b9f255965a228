#pragma once

#include <functional>

#include "glrsens/linalg.hpp"
#include "glrsens/model.hpp"

namespace glrsens {

// Reciprocal-condition threshold below which a Jacobian counts as singular.
inline constexpr double kSingularTol = 1e-10;

// Densities at or below this floor raise ZeroDensity instead of producing
// huge ratio weights; landing here means the support is mis-specified.
inline constexpr double kDensityFloor = 1e-300;

struct FDConfig {
  double rel_step = 1e-5;
  double min_abs_step = 1e-8;
};

// The three weight functions of the generalized estimator at one point.
struct SensitivityWeights {
  Vec s;      // J_g^-1 dtheta_g
  double d;   // div(-f s) / f
  double l;   // dtheta log f
};

// Transform accessors with finite-difference fallbacks for omitted callables.
Matrix jacobian_of(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});
Vec dtheta_of(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// Density value with the floor check applied.
double density_checked(const Problem& p, const Vec& x, double theta);

// Velocity s(x, theta): solves J_g s = dtheta_g with partial pivoting.
Vec velocity(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// d(x, theta) = div(-f s)/f by per-coordinate central differences on the
// composite field. Steps shrink to stay inside the support; points on the
// boundary itself raise BoundaryEvaluation.
double weight_d(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// l(x, theta) = dtheta log f, analytic when the density carries a score.
double weight_l(const Problem& p, const Vec& x, double theta);

SensitivityWeights weights(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// Central-difference Jacobian of an arbitrary map, step h_i = max(rel|x_i|, min_abs).
Matrix fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, const FDConfig& fd = {});

// Trace of the FD Jacobian (only diagonal partials are evaluated).
double fd_divergence(const std::function<Vec(const Vec&)>& field, const Vec& x, const FDConfig& fd = {});

// Divergence of `field` at an interior point of p's support, with steps
// shrunk so every probe stays strictly inside. Shared by weight_d and the
// single-run estimator.
double fd_divergence_in_support(const Problem& p, const std::function<Vec(const Vec&)>& field,
                                const Vec& x, const FDConfig& fd = {});

// Scalar central difference in theta.
double fd_dtheta(const std::function<double(double)>& fn, double theta, const FDConfig& fd = {});

}  // namespace glrsens

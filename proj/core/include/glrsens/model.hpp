#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glrsens/errors.hpp"
#include "glrsens/linalg.hpp"
#include "glrsens/rng.hpp"

namespace glrsens {

// Open parameter interval the sensitivity parameter lives in.
struct ParameterInterval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains_strict(double theta) const { return theta > lo && theta < hi; }
  double width() const { return hi - lo; }
};

// One axis-aligned face of a hyperrectangle: coordinate `axis` pinned to
// `value`, outward normal side * e_axis (side -1 for the lower bound, +1 for
// the upper bound).
struct Face {
  int axis = 0;
  double value = 0.0;
  int side = -1;
};

// (axis, side) pair identifying a face in draw maps.
using FaceKey = std::pair<int, int>;

inline FaceKey face_key(const Face& f) { return {f.axis, f.side}; }

// Hyperrectangle support [a_1,b_1] x ... x [a_n,b_n]; bounds may be +/-inf.
struct Support {
  int dims = 0;
  Vec lower;
  Vec upper;

  static Support box(Vec lo, Vec hi) {
    Support s;
    s.dims = static_cast<int>(lo.size());
    if (lo.size() != hi.size()) throw DimensionMismatch("Support: lower/upper length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]) || !(lo[i] < hi[i])) {
        throw DimensionMismatch("Support: need a_i < b_i on every axis");
      }
    }
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    return s;
  }

  // One face per finite bound; axes unbounded on a side contribute no face
  // there (their boundary flux is treated as zero by the estimators).
  std::vector<Face> finite_faces() const {
    std::vector<Face> faces;
    for (int i = 0; i < dims; ++i) {
      if (std::isfinite(lower[static_cast<std::size_t>(i)])) {
        faces.push_back({i, lower[static_cast<std::size_t>(i)], -1});
      }
      if (std::isfinite(upper[static_cast<std::size_t>(i)])) {
        faces.push_back({i, upper[static_cast<std::size_t>(i)], +1});
      }
    }
    return faces;
  }

  bool has_infinite_bound() const {
    for (int i = 0; i < dims; ++i) {
      if (!std::isfinite(lower[static_cast<std::size_t>(i)]) ||
          !std::isfinite(upper[static_cast<std::size_t>(i)])) {
        return true;
      }
    }
    return false;
  }

  bool contains_closed(const Vec& x) const {
    for (int i = 0; i < dims; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (x[k] < lower[k] || x[k] > upper[k]) return false;
    }
    return true;
  }
};

// Input density f(x, theta) plus the accessors the estimators need. Callables
// left empty fall back to central finite differences (see calculus).
struct ParametricDensity {
  int dims = 0;

  // f(x, theta); must evaluate on the closure of the support and return 0
  // outside it.
  std::function<double(const Vec&, double)> density;

  // d/dtheta log f(x, theta). Optional.
  std::function<double(const Vec&, double)> score;

  // Spatial gradient of f. Optional.
  std::function<Vec(const Vec&, double)> grad_x;

  // Marginal density of coordinate i at value v: f_{X_i}(v; theta).
  std::function<double(int, double, double)> marginal;

  // Quantile of the marginal of coordinate i: smallest v with mass p below.
  // Optional; used to cap infinite bounds for quadrature and probing.
  std::function<double(int, double, double)> tail_quantile;

  // Draws X ~ f(., theta).
  std::function<Vec(RngStream&, double)> sampler;

  // Draws the free coordinates of a face point from f_{X | X_i = face value}.
  // Only needed for dependent components; independent ones reuse the
  // replication's interior draw with the face coordinate clamped.
  std::function<Vec(RngStream&, const Face&, double, const Vec&)> conditional_face_sampler;

  bool independent_components = false;
};

// Push-out map g(x, theta) with its Jacobian and parameter velocity.
struct Transform {
  int dims = 0;
  std::function<Vec(const Vec&, double)> map;
  std::function<Matrix(const Vec&, double)> jacobian;  // optional -> FD
  std::function<Vec(const Vec&, double)> dtheta;       // optional -> FD
};

enum class Smoothness { smooth, ae_differentiable, measurable_only };

// Sample performance phi(y). `bound` is the user-declared sup of |phi|;
// evaluations past it raise BoundViolation instead of silently continuing.
struct Performance {
  int dims = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;  // optional; required by glr_single_run
  Smoothness tag = Smoothness::measurable_only;
  double bound = 1e12;

  double operator()(const Vec& y) const {
    const double v = eval(y);
    if (!std::isfinite(v)) throw NonFiniteValue("performance returned non-finite value");
    if (std::fabs(v) > bound) {
      throw BoundViolation("performance exceeded declared bound " + std::to_string(bound));
    }
    return v;
  }
};

// Optional push-out formulation: Y sampled directly from the pushed density,
// with the score of that density and the theta-free performance.
struct PushoutForm {
  std::function<Vec(RngStream&, double)> sampler;
  std::function<double(const Vec&, double)> score;
  std::function<double(const Vec&)> perf;
};

// The full problem bundle consumed by the estimators and checkers.
struct Problem {
  std::string id;
  std::string summary;

  ParametricDensity density;
  Transform transform;
  Performance performance;
  Support support;
  ParameterInterval theta_interval;

  // d/dtheta E(phi(g(X,theta))) when known in closed form; feeds the
  // true_value column of experiment output.
  std::function<double(double)> analytic_derivative;

  std::optional<PushoutForm> pushout;

  // Base density f0 (independent of theta, f << f0) for the IPA-LR baseline.
  std::optional<ParametricDensity> ipa_base;

  // Interior points used by the identity checkers; defaults are derived from
  // marginal medians when empty.
  std::vector<Vec> verify_probes;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

struct ValidationOptions {
  double normalization_tol = 1e-8;
  double consistency_tol = 1e-6;
  double singular_tol = 1e-10;
};

// Probes the problem's callables at `probes` points drawn from RngStream(seed)
// and reports density-normalization, score-consistency, Jacobian-consistency,
// and Jacobian-invertibility results. Deterministic given (p, probes, seed).
ValidationReport validate_problem(const Problem& p, int probes, std::uint64_t seed,
                                  const ValidationOptions& opts = {});

}  // namespace glrsens

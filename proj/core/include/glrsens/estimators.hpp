#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "glrsens/calculus.hpp"
#include "glrsens/model.hpp"
#include "glrsens/sampling.hpp"

namespace glrsens {

enum class EstimatorKind {
  ipa_lr,
  pushout_lr,
  glr_interior,
  glr_surface_rect,
  glr_full,
  glr_single_run,
};

std::string to_string(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_string(const std::string& name);

struct EstimateReport {
  EstimatorKind estimator = EstimatorKind::glr_full;
  double theta = 0.0;
  double point = 0.0;
  double stderr_ = 0.0;  // NaN when replications == 1
  std::size_t replications = 0;
  std::uint64_t seed = 0;
};

// IPA-LR sample for x drawn from the theta-free base density f0:
// dtheta_psi * h + psi * dtheta_h with h = f/f0 and psi = phi(g(x, theta)).
// Requires a performance smooth in theta.
double ipa_lr_sample(const Problem& p, const ParametricDensity& base, const Vec& x, double theta,
                     const FDConfig& fd = {});

// Classic push-out LR sample: pushed_perf(y) * pushed_score(y, theta) for y
// drawn from the pushed density.
double pushout_lr_sample(const Vec& y, double theta,
                         const std::function<double(const Vec&, double)>& pushed_score,
                         const std::function<double(const Vec&)>& pushed_perf);

// Interior weight sample phi(g(x, theta)). (d + l).
double glr_interior_sample(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// Surface sample over the hyperrectangle faces:
//   sum over finite faces of side * phi(g(x_face, theta)) * f_{X_i}(value) * s_i(x_face).
// Faces at +/-inf contribute zero (tail decay is a documented precondition).
double glr_surface_rect_sample(const Problem& p, double theta,
                               const std::map<FaceKey, Vec>& face_draws, const FDConfig& fd = {});

// Single-run form for a.e.-differentiable performances:
//   phi(g)(d + l) + grad_phi(g)^T J_g s + phi(g) div(s f)/f.
double glr_single_run_sample(const Problem& p, const Vec& x, double theta, const FDConfig& fd = {});

// Replication-averaged estimate for any estimator kind the problem supports.
// Replication k draws from RngStream(seed, k); interior and face draws share
// that stream. Per-replication values are combined in replication order, so
// results are identical for any thread count.
EstimateReport estimate(const Problem& p, EstimatorKind kind, double theta,
                        std::size_t replications, std::uint64_t seed, int threads = 1);

// Interior + surface sample per replication, averaged with one stderr.
EstimateReport glr_full_estimate(const Problem& p, double theta, std::size_t replications,
                                 std::uint64_t seed, int threads = 1);

}  // namespace glrsens

#include "glrsens/estimators.hpp"

#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace glrsens {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ipa_lr: return "ipa_lr";
    case EstimatorKind::pushout_lr: return "pushout_lr";
    case EstimatorKind::glr_interior: return "glr_interior";
    case EstimatorKind::glr_surface_rect: return "glr_surface_rect";
    case EstimatorKind::glr_full: return "glr_full";
    case EstimatorKind::glr_single_run: return "glr_single_run";
  }
  return "unknown";
}

std::optional<EstimatorKind> estimator_from_string(const std::string& name) {
  if (name == "ipa_lr") return EstimatorKind::ipa_lr;
  if (name == "pushout_lr") return EstimatorKind::pushout_lr;
  if (name == "glr_interior") return EstimatorKind::glr_interior;
  if (name == "glr_surface_rect") return EstimatorKind::glr_surface_rect;
  if (name == "glr_full") return EstimatorKind::glr_full;
  if (name == "glr_single_run") return EstimatorKind::glr_single_run;
  return std::nullopt;
}

double ipa_lr_sample(const Problem& p, const ParametricDensity& base, const Vec& x, double theta,
                     const FDConfig& fd) {
  if (p.performance.tag != Smoothness::smooth) {
    throw SmoothnessViolation("ipa_lr needs a performance smooth in theta");
  }
  const double f0 = base.density(x, theta);
  if (!std::isfinite(f0)) throw NonFiniteValue("ipa_lr: base density non-finite");
  if (f0 <= kDensityFloor) throw ZeroDensity("ipa_lr: base density vanishes at sample");
  const double f = p.density.density(x, theta);
  if (!std::isfinite(f)) throw NonFiniteValue("ipa_lr: density non-finite");
  const double ratio = f / f0;

  auto psi = [&](double t) { return p.performance(p.transform.map(x, t)); };
  const double dpsi = fd_dtheta(psi, theta, fd);

  double dratio;
  if (p.density.score) {
    dratio = ratio * p.density.score(x, theta);
  } else {
    dratio = fd_dtheta([&](double t) { return p.density.density(x, t) / f0; }, theta, fd);
  }
  const double value = dpsi * ratio + psi(theta) * dratio;
  if (!std::isfinite(value)) throw NonFiniteValue("ipa_lr: non-finite sample");
  return value;
}

double pushout_lr_sample(const Vec& y, double theta,
                         const std::function<double(const Vec&, double)>& pushed_score,
                         const std::function<double(const Vec&)>& pushed_perf) {
  const double value = pushed_perf(y) * pushed_score(y, theta);
  if (!std::isfinite(value)) throw NonFiniteValue("pushout_lr: non-finite sample");
  return value;
}

double glr_interior_sample(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  const double phi = p.performance(p.transform.map(x, theta));
  if (phi == 0.0) {
    // Dead indicator: skip the weight evaluation but keep the error contract
    // for degenerate densities.
    density_checked(p, x, theta);
    return 0.0;
  }
  const double d = weight_d(p, x, theta, fd);
  const double l = weight_l(p, x, theta);
  return phi * (d + l);
}

double glr_surface_rect_sample(const Problem& p, double theta,
                               const std::map<FaceKey, Vec>& face_draws, const FDConfig& fd) {
  double total = 0.0;
  for (const Face& face : p.support.finite_faces()) {
    const auto it = face_draws.find(face_key(face));
    if (it == face_draws.end()) {
      throw MissingFaceDraw("no draw for face axis " + std::to_string(face.axis) +
                            (face.side < 0 ? " lower" : " upper"));
    }
    const Vec& xf = it->second;
    if (!p.density.marginal) {
      throw UnsupportedSupport("surface estimator needs marginal densities");
    }
    const double marginal = p.density.marginal(face.axis, face.value, theta);
    if (!std::isfinite(marginal)) throw NonFiniteValue("marginal returned non-finite value");
    if (marginal == 0.0) continue;  // density vanishes on this face
    const double phi = p.performance(p.transform.map(xf, theta));
    if (phi == 0.0) continue;
    const Vec s = velocity(p, xf, theta, fd);
    total += static_cast<double>(face.side) * phi * marginal * s[static_cast<std::size_t>(face.axis)];
  }
  if (!std::isfinite(total)) throw NonFiniteValue("glr_surface_rect: non-finite sample");
  return total;
}

double glr_single_run_sample(const Problem& p, const Vec& x, double theta, const FDConfig& fd) {
  if (p.performance.tag == Smoothness::measurable_only) {
    throw SmoothnessViolation("glr_single_run needs an a.e. differentiable performance");
  }
  if (!p.performance.grad) {
    throw SmoothnessViolation("glr_single_run needs a performance gradient");
  }
  const double f = density_checked(p, x, theta);
  const Vec y = p.transform.map(x, theta);
  const double phi = p.performance(y);
  const double d = weight_d(p, x, theta, fd);
  const double l = weight_l(p, x, theta);

  const Vec grad_phi = p.performance.grad(y);
  const Matrix jac = jacobian_of(p, x, theta, fd);
  const Vec s = velocity(p, x, theta, fd);
  const double grad_term = dot(grad_phi, matvec(jac, s));

  // div(s f)/f by the same finite-difference path as weight_d.
  auto field = [&](const Vec& q) {
    const double fq = p.density.density(q, theta);
    Vec sq = velocity(p, q, theta, fd);
    for (double& v : sq) v *= fq;
    return sq;
  };
  const double div_sf = fd_divergence_in_support(p, field, x, fd);

  const double value = phi * (d + l) + grad_term + phi * div_sf / f;
  if (!std::isfinite(value)) throw NonFiniteValue("glr_single_run: non-finite sample");
  return value;
}

namespace {

void warn_infinite_faces_once(const Problem& p, std::size_t replications) {
  if (replications > 0 && p.support.has_infinite_bound()) {
    std::cerr << "note: faces at infinity contribute zero surface term"
              << " (density tail decay is asserted by the problem definition)\n";
  }
}

std::map<FaceKey, Vec> draw_faces(const Problem& p, RngStream& stream, double theta,
                                  const Vec& interior) {
  std::map<FaceKey, Vec> draws;
  for (const Face& face : p.support.finite_faces()) {
    draws.emplace(face_key(face), sample_face_conditional(p, stream, face, theta, interior));
  }
  return draws;
}

// Runs `replications` seeded samples of `one` and summarizes them.
// Values land in a fixed buffer indexed by replication, so the summary is
// identical for any thread count.
template <typename SampleFn>
EstimateReport run_replications(const Problem& p, EstimatorKind kind, double theta,
                                std::size_t replications, std::uint64_t seed, int threads,
                                SampleFn one) {
  if (replications == 0) throw EmptyInput("estimate: need at least one replication");
  std::vector<double> values(replications, 0.0);

  struct Failure {
    std::size_t replication;
    std::exception_ptr error;
  };
  std::mutex failure_mutex;
  std::optional<Failure> failure;

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        RngStream stream(seed, k);
        values[k] = one(stream, k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure || k < failure->replication) {
          failure = Failure{k, std::current_exception()};
        }
        return;
      }
    }
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1 || replications < 2) {
    worker(0, replications);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (replications + nthreads - 1) / static_cast<std::size_t>(nthreads);
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      if (begin >= replications) break;
      const std::size_t end = std::min(replications, begin + chunk);
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  if (failure) {
    try {
      std::rethrow_exception(failure->error);
    } catch (const Error& e) {
      throw ReplicationError(failure->replication, e.what());
    } catch (const std::exception& e) {
      throw ReplicationError(failure->replication, e.what());
    }
  }

  const SummaryStats stats = summarize(values);
  EstimateReport report;
  report.estimator = kind;
  report.theta = theta;
  report.point = stats.mean;
  report.stderr_ = stats.stderr_;
  report.replications = replications;
  report.seed = seed;
  return report;
}

}  // namespace

EstimateReport glr_full_estimate(const Problem& p, double theta, std::size_t replications,
                                 std::uint64_t seed, int threads) {
  warn_infinite_faces_once(p, replications);
  return run_replications(p, EstimatorKind::glr_full, theta, replications, seed, threads,
                          [&](RngStream& stream, std::size_t) {
                            const Vec x = p.density.sampler(stream, theta);
                            const double interior = glr_interior_sample(p, x, theta);
                            const auto faces = draw_faces(p, stream, theta, x);
                            const double surface = glr_surface_rect_sample(p, theta, faces);
                            return interior + surface;
                          });
}

EstimateReport estimate(const Problem& p, EstimatorKind kind, double theta,
                        std::size_t replications, std::uint64_t seed, int threads) {
  switch (kind) {
    case EstimatorKind::glr_full:
      return glr_full_estimate(p, theta, replications, seed, threads);
    case EstimatorKind::glr_interior:
      return run_replications(p, kind, theta, replications, seed, threads,
                              [&](RngStream& stream, std::size_t) {
                                const Vec x = p.density.sampler(stream, theta);
                                return glr_interior_sample(p, x, theta);
                              });
    case EstimatorKind::glr_surface_rect:
      warn_infinite_faces_once(p, replications);
      return run_replications(p, kind, theta, replications, seed, threads,
                              [&](RngStream& stream, std::size_t) {
                                const Vec x = p.density.sampler(stream, theta);
                                const auto faces = draw_faces(p, stream, theta, x);
                                return glr_surface_rect_sample(p, theta, faces);
                              });
    case EstimatorKind::glr_single_run:
      return run_replications(p, kind, theta, replications, seed, threads,
                              [&](RngStream& stream, std::size_t) {
                                const Vec x = p.density.sampler(stream, theta);
                                return glr_single_run_sample(p, x, theta);
                              });
    case EstimatorKind::pushout_lr: {
      if (!p.pushout) {
        throw SmoothnessViolation("problem \"" + p.id + "\" registers no push-out form");
      }
      const PushoutForm& form = *p.pushout;
      return run_replications(p, kind, theta, replications, seed, threads,
                              [&](RngStream& stream, std::size_t) {
                                const Vec y = form.sampler(stream, theta);
                                return pushout_lr_sample(y, theta, form.score, form.perf);
                              });
    }
    case EstimatorKind::ipa_lr: {
      if (!p.ipa_base) {
        throw SmoothnessViolation("problem \"" + p.id + "\" registers no IPA base density");
      }
      const ParametricDensity& base = *p.ipa_base;
      return run_replications(p, kind, theta, replications, seed, threads,
                              [&](RngStream& stream, std::size_t) {
                                const Vec x = base.sampler(stream, theta);
                                return ipa_lr_sample(p, base, x, theta);
                              });
    }
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace glrsens

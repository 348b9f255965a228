#pragma once

#include <cstddef>
#include <span>

#include "glrsens/model.hpp"
#include "glrsens/rng.hpp"

namespace glrsens {

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std (n-1 denominator) / sqrt(n); NaN for n = 1
  double min = 0.0;
  double max = 0.0;
};

// Inverse-CDF exponential draw: -log(1 - U)/rate. Inverse CDF (rather than a
// rejection scheme) keeps sequences bit-reproducible for pinned seeds.
double sample_exponential(RngStream& stream, double rate);

// Independent per-coordinate uniforms over a finite box.
Vec sample_uniform_box(RngStream& stream, const Vec& lower, const Vec& upper);

// Point on `face` with the pinned coordinate bit-equal to the bound. For
// independent components the free coordinates reuse `interior_draw` (the
// single-path simplification); otherwise the problem must register a
// conditional face sampler.
Vec sample_face_conditional(const Problem& p, RngStream& stream, const Face& face, double theta,
                            const Vec& interior_draw);

SummaryStats summarize(std::span<const double> values);

}  // namespace glrsens

#include "glrsens/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace glrsens {

double sample_exponential(RngStream& stream, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw InvalidRate("exponential rate must be positive and finite");
  }
  const double u = stream.next_unit();
  return -std::log1p(-u) / rate;
}

Vec sample_uniform_box(RngStream& stream, const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size()) throw DimensionMismatch("sample_uniform_box: bound sizes differ");
  Vec x(lower.size(), 0.0);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw InfiniteBound("sample_uniform_box: bounds must be finite");
    }
    if (!(lower[i] < upper[i])) {
      throw InfiniteBound("sample_uniform_box: degenerate interval on axis " + std::to_string(i));
    }
    x[i] = lower[i] + (upper[i] - lower[i]) * stream.next_unit();
  }
  return x;
}

Vec sample_face_conditional(const Problem& p, RngStream& stream, const Face& face, double theta,
                            const Vec& interior_draw) {
  if (face.axis < 0 || face.axis >= p.support.dims) {
    throw DimensionMismatch("sample_face_conditional: face axis out of range");
  }
  if (p.density.independent_components) {
    Vec x = interior_draw;
    x[static_cast<std::size_t>(face.axis)] = face.value;
    return x;
  }
  if (p.density.conditional_face_sampler) {
    Vec x = p.density.conditional_face_sampler(stream, face, theta, interior_draw);
    x[static_cast<std::size_t>(face.axis)] = face.value;
    return x;
  }
  throw NoConditionalSampler(
      "dependent components need a registered conditional face sampler for axis " +
      std::to_string(face.axis));
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("summarize: no values");
  SummaryStats s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n == 1) {
    s.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double v : values) {
    const double dev = v - s.mean;
    ss += dev * dev;
  }
  const double var = ss / static_cast<double>(s.n - 1);
  s.stderr_ = std::sqrt(var / static_cast<double>(s.n));
  return s;
}

}  // namespace glrsens

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "glrsens/estimators.hpp"
#include "glrsens/problems.hpp"
#include "glrsens/rng.hpp"
#include "glrsens/sampling.hpp"

using namespace glrsens;

TEST_CASE("stream sequences are reproducible and stream-separated") {
  RngStream a(123, 5);
  RngStream b(123, 5);
  RngStream c(123, 6);
  bool same = true;
  bool distinct = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    same = same && (va == b.next_u64());
    distinct = distinct || (va != c.next_u64());
  }
  CHECK(same);
  CHECK(distinct);
}

TEST_CASE("unit draws live in [0,1)") {
  RngStream s(77, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = s.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("exponential draw is the inverse-CDF transform of the stream") {
  RngStream draws(9, 3);
  RngStream uniforms(9, 3);
  for (int i = 0; i < 100; ++i) {
    const double x = sample_exponential(draws, 2.5);
    const double u = uniforms.next_unit();
    CHECK(x == -std::log1p(-u) / 2.5);
  }
}

TEST_CASE("exponential rejects bad rates") {
  RngStream s(1, 0);
  CHECK_THROWS_AS(sample_exponential(s, 0.0), InvalidRate);
  CHECK_THROWS_AS(sample_exponential(s, -1.0), InvalidRate);
  CHECK_THROWS_AS(sample_exponential(s, std::numeric_limits<double>::infinity()), InvalidRate);
}

TEST_CASE("exponential empirical mean matches 1/rate") {
  RngStream s(2024, 0);
  const int n = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_exponential(s, 2.0);
  CHECK(std::fabs(sum / n - 0.5) < 0.002);
}

TEST_CASE("exponential draws pass a KS smoke test") {
  RngStream s(31337, 0);
  const double rate = 1.3;
  std::vector<double> draws(10'000);
  for (double& d : draws) d = sample_exponential(s, rate);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double cdf = 1.0 - std::exp(-rate * draws[i]);
    ks = std::max(ks, std::fabs((static_cast<double>(i) + 1.0) / n - cdf));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("uniform box sampling") {
  RngStream s(5, 0);
  const Vec lo{-1.0, 2.0};
  const Vec hi{1.0, 6.0};

  SUBCASE("draws stay inside and means match the centers") {
    const int n = 20'000;
    Vec mean{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const Vec x = sample_uniform_box(s, lo, hi);
      for (int k = 0; k < 2; ++k) {
        CHECK(x[k] >= lo[k]);
        CHECK(x[k] < hi[k]);
        mean[k] += x[k];
      }
    }
    for (int k = 0; k < 2; ++k) {
      mean[k] /= n;
      const double sigma = (hi[k] - lo[k]) / std::sqrt(12.0 * n);
      CHECK(std::fabs(mean[k] - 0.5 * (lo[k] + hi[k])) < 3.0 * sigma);
    }
  }

  SUBCASE("rejects infinite and degenerate bounds") {
    CHECK_THROWS_AS(sample_uniform_box(s, {0.0}, {std::numeric_limits<double>::infinity()}),
                    InfiniteBound);
    CHECK_THROWS_AS(sample_uniform_box(s, {1.0}, {1.0}), InfiniteBound);
  }
}

TEST_CASE("face-conditional sampling") {
  SUBCASE("toy problem: the single face point is just the bound") {
    const Problem p = toy_shifted_exp();
    RngStream s(1, 0);
    const Face face = p.support.finite_faces().at(0);
    const Vec x = sample_face_conditional(p, s, face, 0.5, Vec{1.7});
    CHECK(x.size() == 1);
    CHECK(x[0] == 0.0);
  }

  SUBCASE("independent 2D: free coordinate reuses the interior draw") {
    const Problem p = rect2d();
    RngStream s(1, 0);
    const Face upper0{0, 1.0, +1};
    const Vec x = sample_face_conditional(p, s, upper0, 0.3, Vec{0.3, 0.7});
    CHECK(x[0] == 1.0);  // bit-equal clamp
    CHECK(x[1] == 0.7);
  }

  SUBCASE("dependent components without a sampler refuse") {
    Problem p = rect2d();
    p.density.independent_components = false;
    RngStream s(1, 0);
    const Face face{0, 0.0, -1};
    CHECK_THROWS_AS(sample_face_conditional(p, s, face, 0.3, Vec{0.5, 0.5}),
                    NoConditionalSampler);
  }

  SUBCASE("a registered conditional sampler is used and clamped") {
    Problem p = rect2d();
    p.density.independent_components = false;
    p.density.conditional_face_sampler = [](RngStream& stream, const Face&, double,
                                            const Vec&) {
      return Vec{0.123, stream.next_unit()};
    };
    RngStream s(42, 0);
    const Face face{0, 1.0, +1};
    const Vec x = sample_face_conditional(p, s, face, 0.3, Vec{0.5, 0.5});
    CHECK(x[0] == 1.0);
    CHECK(x[1] > 0.0);
    CHECK(x[1] < 1.0);
  }
}

TEST_CASE("summarize") {
  SUBCASE("constants") {
    const std::vector<double> v{1.0, 1.0, 1.0};
    const SummaryStats s = summarize(v);
    CHECK(s.mean == 1.0);
    CHECK(s.stderr_ == 0.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 1.0);
  }
  SUBCASE("two points") {
    const std::vector<double> v{0.0, 2.0};
    const SummaryStats s = summarize(v);
    CHECK(s.mean == doctest::Approx(1.0));
    CHECK(s.stderr_ == doctest::Approx(1.0));  // sample std sqrt(2), / sqrt(2)
  }
  SUBCASE("single point has NaN stderr") {
    const std::vector<double> v{3.5};
    const SummaryStats s = summarize(v);
    CHECK(s.mean == 3.5);
    CHECK(std::isnan(s.stderr_));
  }
  SUBCASE("empty input") {
    const std::vector<double> v;
    CHECK_THROWS_AS(summarize(v), EmptyInput);
  }
}

TEST_CASE("estimates are bit-identical across runs and thread counts") {
  const Problem p = toy_shifted_exp();
  const EstimateReport serial = glr_full_estimate(p, 0.6, 500, 99, 1);
  const EstimateReport again = glr_full_estimate(p, 0.6, 500, 99, 1);
  const EstimateReport threaded = glr_full_estimate(p, 0.6, 500, 99, 4);
  CHECK(std::memcmp(&serial.point, &again.point, sizeof(double)) == 0);
  CHECK(std::memcmp(&serial.stderr_, &again.stderr_, sizeof(double)) == 0);
  CHECK(std::memcmp(&serial.point, &threaded.point, sizeof(double)) == 0);
  CHECK(std::memcmp(&serial.stderr_, &threaded.stderr_, sizeof(double)) == 0);
}

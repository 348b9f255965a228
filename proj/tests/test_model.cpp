#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "glrsens/model.hpp"
#include "glrsens/problems.hpp"
#include "glrsens/quadrature.hpp"

using namespace glrsens;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("toy problem pointwise values") {
  const Problem p = toy_shifted_exp();
  const Vec x{1.0};
  const double theta = 0.5;
  CHECK(p.density.density(x, theta) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(p.density.score(x, theta) == doctest::Approx(1.0));  // 1/theta - x
  CHECK(p.transform.map(x, theta)[0] == doctest::Approx(0.5));
  CHECK(p.transform.jacobian(x, theta)(0, 0) == 1.0);
  CHECK(p.transform.dtheta(x, theta)[0] == -1.0);
  CHECK(p.performance(Vec{-0.1}) == 1.0);
  CHECK(p.performance(Vec{0.1}) == 0.0);
}

TEST_CASE("support face enumeration") {
  SUBCASE("toy: one finite face with inward-pointing lower normal") {
    const Problem p = toy_shifted_exp();
    const auto faces = p.support.finite_faces();
    REQUIRE(faces.size() == 1);
    CHECK(faces[0].axis == 0);
    CHECK(faces[0].value == 0.0);
    CHECK(faces[0].side == -1);
  }
  SUBCASE("unit square: four faces") {
    CHECK(Support::box({0.0, 0.0}, {1.0, 1.0}).finite_faces().size() == 4);
  }
  SUBCASE("half-infinite axis contributes one face") {
    CHECK(Support::box({0.0, 0.0}, {1.0, kInf}).finite_faces().size() == 3);
  }
  SUBCASE("bad boxes are rejected") {
    CHECK_THROWS_AS(Support::box({1.0}, {1.0}), DimensionMismatch);
    CHECK_THROWS_AS(Support::box({2.0}, {1.0}), DimensionMismatch);
    CHECK_THROWS_AS(Support::box({0.0, 0.0}, {1.0}), DimensionMismatch);
  }
}

TEST_CASE("toy density mass over [0, 40/theta] is 1 to 1e-12") {
  const Problem p = toy_shifted_exp();
  for (double theta : {0.2, 0.5, 0.9}) {
    const double mass = integrate_1d(
        [&](double x) { return p.density.density(Vec{x}, theta); }, 0.0, 40.0 / theta, 1e-13,
        4000);
    CHECK(std::fabs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("validate_problem accepts every builtin") {
  for (const auto& id : builtin_problem_ids()) {
    const ValidationReport report = validate_problem(make_problem(id), 32, 7);
    INFO("problem ", id);
    CHECK(report.all_pass());
    CHECK(report.checks.size() >= 4);
  }
}

TEST_CASE("validate_problem is deterministic") {
  const Problem p = toy_shifted_exp();
  const ValidationReport a = validate_problem(p, 16, 123);
  const ValidationReport b = validate_problem(p, 16, 123);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].max_residual == b.checks[i].max_residual);
    CHECK(a.checks[i].pass == b.checks[i].pass);
  }
}

TEST_CASE("scaled density fails normalization with residual 1") {
  Problem p = toy_shifted_exp();
  const auto base = p.density.density;
  p.density.density = [base](const Vec& x, double theta) { return 2.0 * base(x, theta); };
  // Score of 2f is unchanged, so only normalization should fail.
  const ValidationReport report = validate_problem(p, 16, 7);
  CHECK_FALSE(report.all_pass());
  bool found = false;
  for (const auto& c : report.checks) {
    if (c.name == "density_normalization") {
      found = true;
      CHECK_FALSE(c.pass);
      CHECK(c.max_residual == doctest::Approx(1.0).epsilon(1e-6));
    } else {
      CHECK(c.pass);
    }
  }
  CHECK(found);
}

TEST_CASE("zero score fails score consistency with the true-score residual") {
  Problem p = toy_shifted_exp();
  p.density.score = [](const Vec&, double) { return 0.0; };
  const ValidationReport report = validate_problem(p, 16, 7);
  bool found = false;
  for (const auto& c : report.checks) {
    if (c.name == "score_consistency") {
      found = true;
      CHECK_FALSE(c.pass);
      // Residual is |0 - (1/theta - x)| at the worst probe; with probes
      // reaching deep into the tail this is far from zero.
      CHECK(c.max_residual > 0.05);
    }
  }
  CHECK(found);
}

TEST_CASE("wrong jacobian fails jacobian consistency") {
  Problem p = toy_shifted_exp();
  p.transform.jacobian = [](const Vec&, double) {
    Matrix j(1, 1);
    j(0, 0) = 2.0;
    return j;
  };
  const ValidationReport report = validate_problem(p, 16, 7);
  bool found = false;
  for (const auto& c : report.checks) {
    if (c.name == "jacobian_consistency") {
      found = true;
      CHECK_FALSE(c.pass);
      CHECK(c.max_residual == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK(found);
}

TEST_CASE("structural errors") {
  SUBCASE("dimension mismatch") {
    Problem p = toy_shifted_exp();
    p.performance.dims = 2;
    CHECK_THROWS_AS(validate_problem(p, 8, 7), DimensionMismatch);
  }
  SUBCASE("NaN-returning callable") {
    Problem p = toy_shifted_exp();
    p.density.score = [](const Vec&, double) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(validate_problem(p, 8, 7), NonFiniteValue);
  }
}

TEST_CASE("performance bound is asserted") {
  Problem p = toy_shifted_exp();
  p.performance.eval = [](const Vec&) { return 5.0; };
  p.performance.bound = 1.0;
  CHECK_THROWS_AS(p.performance(Vec{0.0}), BoundViolation);
}

TEST_CASE("unknown problem id") {
  CHECK_THROWS_AS(make_problem("nope"), UnknownProblem);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "glrsens/calculus.hpp"
#include "glrsens/problems.hpp"

using namespace glrsens;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2D fixture with a mixing transform: g(x, theta) = (theta x1, x2 + theta x1)
// over a uniform density on [0,1]^2.
Problem mixing2d() {
  Problem p = rect2d();
  p.id = "mixing2d";
  p.theta_interval = {0.1, 0.9};
  p.transform.map = [](const Vec& x, double theta) {
    return Vec{theta * x[0], x[1] + theta * x[0]};
  };
  p.transform.jacobian = [](const Vec&, double theta) {
    Matrix j(2, 2);
    j(0, 0) = theta;
    j(0, 1) = 0.0;
    j(1, 0) = theta;
    j(1, 1) = 1.0;
    return j;
  };
  p.transform.dtheta = [](const Vec& x, double) { return Vec{x[0], x[0]}; };
  return p;
}

// Independent Cramer-rule oracle for 2x2 systems.
Vec cramer2(const Matrix& a, const Vec& b) {
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return {(b[0] * a(1, 1) - a(0, 1) * b[1]) / det, (a(0, 0) * b[1] - b[0] * a(1, 0)) / det};
}

}  // namespace

TEST_CASE("velocity on the toy problem is identically -1") {
  const Problem p = toy_shifted_exp();
  for (double theta : {0.2, 0.5, 0.8}) {
    for (double x : {0.1, 1.0, 5.0}) {
      const Vec s = velocity(p, Vec{x}, theta);
      CHECK(s[0] == -1.0);
    }
  }
}

TEST_CASE("velocity vanishes for theta-free transforms") {
  Problem p = toy_shifted_exp();
  p.transform.map = [](const Vec& x, double) { return x; };
  p.transform.dtheta = [](const Vec&, double) { return Vec{0.0}; };
  const Vec s = velocity(p, Vec{1.0}, 0.5);
  CHECK(s[0] == 0.0);
}

TEST_CASE("velocity solves the 2D mixing system") {
  const Problem p = mixing2d();
  const Vec x{1.0, 1.0};
  const double theta = 0.3;
  const Vec s = velocity(p, x, theta);
  // Frozen oracle values: J = [[0.3, 0], [0.3, 1]], dtheta_g = (1, 1)
  // => s = (10/3, 0).
  CHECK(s[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  const Vec oracle = cramer2(p.transform.jacobian(x, theta), p.transform.dtheta(x, theta));
  CHECK(s[0] == doctest::Approx(oracle[0]).epsilon(1e-13));
  CHECK(s[1] == doctest::Approx(oracle[1]).scale(1.0).epsilon(1e-13));
}

TEST_CASE("velocity residual stays under 1e-10 across random probes") {
  for (const char* id : {"toy_shifted_exp", "toy_pushout", "rect2d", "linear1d"}) {
    const Problem p = make_problem(id);
    RngStream stream(404, 0);
    for (int k = 0; k < 50; ++k) {
      const double theta = p.theta_interval.lo +
                           p.theta_interval.width() * (0.05 + 0.9 * stream.next_unit());
      const Vec x = p.density.sampler(stream, theta);
      const Vec s = velocity(p, x, theta);
      const Vec lhs = matvec(p.transform.jacobian(x, theta), s);
      const Vec rhs = p.transform.dtheta(x, theta);
      for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(std::fabs(lhs[i] - rhs[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("singular jacobian raises") {
  Problem p = toy_shifted_exp();
  p.transform.jacobian = [](const Vec&, double) { return Matrix(1, 1); };  // zero matrix
  CHECK_THROWS_AS(velocity(p, Vec{1.0}, 0.5), SingularJacobian);
}

TEST_CASE("weight_d on the toy problem equals -theta") {
  const Problem p = toy_shifted_exp();
  CHECK(weight_d(p, Vec{1.0}, 0.5) == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(weight_d(p, Vec{0.4}, 0.3) == doctest::Approx(-0.3).epsilon(1e-8));
}

TEST_CASE("weight_d is exactly zero when the transform ignores theta") {
  Problem p = toy_shifted_exp();
  p.transform.map = [](const Vec& x, double) { return x; };
  p.transform.jacobian = [](const Vec&, double) { return Matrix::identity(1); };
  p.transform.dtheta = [](const Vec&, double) { return Vec{0.0}; };
  CHECK(weight_d(p, Vec{1.0}, 0.5) == 0.0);
}

TEST_CASE("weight_d on the 2D mixing problem is zero at interior points") {
  // s = (x1/theta - ..., ...) -- for this transform s(x) = (x1/theta, 0)?
  // Solve J s = (x1, x1): s1 = x1/theta, s2 = x1 - theta s1 = 0, so s is
  // linear in x1 and the uniform density is constant: div(-f s) = -f/theta.
  const Problem p = mixing2d();
  const double theta = 0.4;
  const double d = weight_d(p, Vec{0.5, 0.5}, theta);
  CHECK(d == doctest::Approx(-1.0 / theta).epsilon(1e-9));
}

TEST_CASE("weight_d errors on the boundary and on dead density") {
  const Problem p = toy_shifted_exp();
  CHECK_THROWS_AS(weight_d(p, Vec{0.0}, 0.5), BoundaryEvaluation);
  CHECK_THROWS_AS(weight_d(p, Vec{-1.0}, 0.5), ZeroDensity);
}

TEST_CASE("weight_l") {
  SUBCASE("toy analytic score") {
    const Problem p = toy_shifted_exp();
    CHECK(weight_l(p, Vec{1.0}, 0.5) == doctest::Approx(1.0));
  }
  SUBCASE("theta-independent density scores zero") {
    const Problem p = linear1d();
    CHECK(weight_l(p, Vec{0.7}, 0.5) == 0.0);
  }
  SUBCASE("finite-difference fallback matches the pushed Exp(theta^2) score") {
    Problem p = toy_shifted_exp();
    p.density.density = [](const Vec& y, double theta) {
      return y[0] >= 0.0 ? theta * theta * std::exp(-theta * theta * y[0]) : 0.0;
    };
    p.density.score = nullptr;
    const double got = weight_l(p, Vec{0.2}, 0.5);
    CHECK(got == doctest::Approx(2.0 / 0.5 - 2.0 * 0.5 * 0.2).epsilon(1e-6));  // 3.8
  }
}

TEST_CASE("fd_jacobian") {
  SUBCASE("exact on linear maps") {
    auto linear = [](const Vec& x) {
      return Vec{2.0 * x[0] - x[1], 0.5 * x[0] + 3.0 * x[1]};
    };
    const Matrix j = fd_jacobian(linear, Vec{0.7, -0.3});
    CHECK(std::fabs(j(0, 0) - 2.0) < 1e-10);
    CHECK(std::fabs(j(0, 1) + 1.0) < 1e-10);
    CHECK(std::fabs(j(1, 0) - 0.5) < 1e-10);
    CHECK(std::fabs(j(1, 1) - 3.0) < 1e-10);
  }
  SUBCASE("x^2 at 2") {
    auto sq = [](const Vec& x) { return Vec{x[0] * x[0]}; };
    CHECK(fd_jacobian(sq, Vec{2.0})(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
  }
  SUBCASE("toy transform") {
    const Problem p = toy_shifted_exp();
    auto map = [&](const Vec& x) { return p.transform.map(x, 0.5); };
    CHECK(fd_jacobian(map, Vec{1.0})(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("fd_divergence") {
  SUBCASE("identity field in R^3") {
    auto field = [](const Vec& x) { return x; };
    CHECK(fd_divergence(field, Vec{0.3, -0.7, 2.0}) == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("constant field") {
    auto field = [](const Vec& x) { return Vec{1.0, -2.0, 0.5, static_cast<double>(x.size())}; };
    CHECK(fd_divergence(field, Vec{1.0, 2.0, 3.0, 4.0}) == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("toy -f*s field: d/dx of theta e^{-theta x}") {
    const double theta = 0.5;
    auto field = [&](const Vec& x) { return Vec{theta * std::exp(-theta * x[0])}; };
    const double expected = -theta * theta * std::exp(-theta);  // -0.25 e^{-0.5}
    CHECK(fd_divergence(field, Vec{1.0}) == doctest::Approx(expected).epsilon(1e-8));
    CHECK(expected == doctest::Approx(-0.15163266492815836).epsilon(1e-12));
  }
}

TEST_CASE("central differences converge at second order on smooth maps") {
  auto expmap = [](const Vec& x) { return Vec{std::exp(x[0])}; };
  const double truth = std::exp(0.7);
  FDConfig coarse{1e-3, 1e-12};
  FDConfig fine{5e-4, 1e-12};
  const double err_coarse = std::fabs(fd_jacobian(expmap, Vec{0.7}, coarse)(0, 0) - truth);
  const double err_fine = std::fabs(fd_jacobian(expmap, Vec{0.7}, fine)(0, 0) - truth);
  const double ratio = err_coarse / err_fine;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);

  // Quadratic maps have no third derivative, so central differences are exact
  // up to rounding there.
  auto quad = [](const Vec& x) { return Vec{x[0] * x[0]}; };
  CHECK(std::fabs(fd_jacobian(quad, Vec{2.0}, coarse)(0, 0) - 4.0) < 1e-9);
}

TEST_CASE("weights bundle agrees with the parts") {
  const Problem p = toy_shifted_exp();
  const SensitivityWeights w = weights(p, Vec{1.0}, 0.5);
  CHECK(w.s[0] == -1.0);
  CHECK(w.d == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(w.l == doctest::Approx(1.0));
}

TEST_CASE("fd_dtheta on a cubic") {
  auto fn = [](double t) { return t * t * t; };
  CHECK(fd_dtheta(fn, 2.0) == doctest::Approx(12.0).epsilon(1e-8));
}

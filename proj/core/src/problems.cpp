#include "glrsens/problems.hpp"

#include <cmath>
#include <limits>

#include "glrsens/sampling.hpp"

namespace glrsens {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double indicator(bool cond) { return cond ? 1.0 : 0.0; }

ParametricDensity exponential_density(double fixed_rate_or_zero) {
  // rate = theta when fixed_rate_or_zero == 0, otherwise the given constant.
  const double fixed = fixed_rate_or_zero;
  ParametricDensity den;
  den.dims = 1;
  den.density = [fixed](const Vec& x, double theta) {
    const double rate = fixed > 0.0 ? fixed : theta;
    return x[0] >= 0.0 ? rate * std::exp(-rate * x[0]) : 0.0;
  };
  den.score = [fixed](const Vec& x, double theta) {
    return fixed > 0.0 ? 0.0 : 1.0 / theta - x[0];
  };
  den.grad_x = [fixed](const Vec& x, double theta) {
    const double rate = fixed > 0.0 ? fixed : theta;
    return Vec{x[0] >= 0.0 ? -rate * rate * std::exp(-rate * x[0]) : 0.0};
  };
  den.marginal = [fixed](int, double v, double theta) {
    const double rate = fixed > 0.0 ? fixed : theta;
    return v >= 0.0 ? rate * std::exp(-rate * v) : 0.0;
  };
  den.tail_quantile = [fixed](int, double p, double theta) {
    const double rate = fixed > 0.0 ? fixed : theta;
    return -std::log1p(-p) / rate;
  };
  den.sampler = [fixed](RngStream& stream, double theta) {
    const double rate = fixed > 0.0 ? fixed : theta;
    return Vec{sample_exponential(stream, rate)};
  };
  den.independent_components = true;
  return den;
}

}  // namespace

Problem toy_shifted_exp() {
  Problem p;
  p.id = "toy_shifted_exp";
  p.summary = "Exp(theta) input, g(x,theta) = x - theta, phi(y) = 1{y < 0}";
  p.density = exponential_density(0.0);
  p.support = Support::box({0.0}, {kInf});
  p.theta_interval = {0.1, 1.0};

  p.transform.dims = 1;
  p.transform.map = [](const Vec& x, double theta) { return Vec{x[0] - theta}; };
  p.transform.jacobian = [](const Vec&, double) {
    Matrix j(1, 1);
    j(0, 0) = 1.0;
    return j;
  };
  p.transform.dtheta = [](const Vec&, double) { return Vec{-1.0}; };

  p.performance.dims = 1;
  p.performance.eval = [](const Vec& y) { return indicator(y[0] < 0.0); };
  p.performance.tag = Smoothness::measurable_only;
  p.performance.bound = 1.0;

  p.analytic_derivative = [](double theta) { return 2.0 * theta * std::exp(-theta * theta); };

  PushoutForm pushout;
  pushout.sampler = [](RngStream& stream, double theta) {
    return Vec{sample_exponential(stream, theta * theta)};
  };
  pushout.score = [](const Vec& y, double theta) { return 2.0 / theta - 2.0 * theta * y[0]; };
  pushout.perf = [](const Vec& y) { return indicator(y[0] < 1.0); };
  p.pushout = pushout;

  p.verify_probes = {{1.0}, {0.3}};
  return p;
}

Problem toy_pushout() {
  Problem p;
  p.id = "toy_pushout";
  p.summary = "Exp(theta) input, g(x,theta) = x / theta (theta-free image), phi(y) = 1{y < 1}";
  p.density = exponential_density(0.0);
  p.support = Support::box({0.0}, {kInf});
  p.theta_interval = {0.1, 1.0};

  p.transform.dims = 1;
  p.transform.map = [](const Vec& x, double theta) { return Vec{x[0] / theta}; };
  p.transform.jacobian = [](const Vec&, double theta) {
    Matrix j(1, 1);
    j(0, 0) = 1.0 / theta;
    return j;
  };
  p.transform.dtheta = [](const Vec& x, double theta) { return Vec{-x[0] / (theta * theta)}; };

  p.performance.dims = 1;
  p.performance.eval = [](const Vec& y) { return indicator(y[0] < 1.0); };
  p.performance.tag = Smoothness::measurable_only;
  p.performance.bound = 1.0;

  p.analytic_derivative = [](double theta) { return 2.0 * theta * std::exp(-theta * theta); };

  p.verify_probes = {{1.0}, {0.3}};
  return p;
}

Problem rect2d() {
  Problem p;
  p.id = "rect2d";
  p.summary = "uniform input on [0,1]^2, g(x,theta) = (x1 + theta x2, x2), phi(y) = 1{y1 < 1/2}";

  p.density.dims = 2;
  p.density.density = [](const Vec& x, double) {
    return (x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0) ? 1.0 : 0.0;
  };
  p.density.score = [](const Vec&, double) { return 0.0; };
  p.density.grad_x = [](const Vec&, double) { return Vec{0.0, 0.0}; };
  p.density.marginal = [](int, double v, double) { return (v >= 0.0 && v <= 1.0) ? 1.0 : 0.0; };
  p.density.tail_quantile = [](int, double prob, double) { return prob; };
  p.density.sampler = [](RngStream& stream, double) {
    return sample_uniform_box(stream, {0.0, 0.0}, {1.0, 1.0});
  };
  p.density.independent_components = true;

  p.support = Support::box({0.0, 0.0}, {1.0, 1.0});
  p.theta_interval = {0.05, 0.5};

  p.transform.dims = 2;
  p.transform.map = [](const Vec& x, double theta) { return Vec{x[0] + theta * x[1], x[1]}; };
  p.transform.jacobian = [](const Vec&, double theta) {
    Matrix j(2, 2);
    j(0, 0) = 1.0;
    j(0, 1) = theta;
    j(1, 0) = 0.0;
    j(1, 1) = 1.0;
    return j;
  };
  p.transform.dtheta = [](const Vec& x, double) { return Vec{x[1], 0.0}; };

  p.performance.dims = 2;
  p.performance.eval = [](const Vec& y) { return indicator(y[0] < 0.5); };
  p.performance.tag = Smoothness::measurable_only;
  p.performance.bound = 1.0;

  // Ground truth intentionally comes from the derivative oracle only.
  p.verify_probes = {{0.2, 0.3}, {0.7, 0.6}};
  return p;
}

Problem linear1d() {
  Problem p;
  p.id = "linear1d";
  p.summary = "Exp(1) input (theta-free), g(x,theta) = theta x, phi(y) = 1{y < 1}";
  p.density = exponential_density(1.0);
  p.support = Support::box({0.0}, {kInf});
  p.theta_interval = {0.1, 1.0};

  p.transform.dims = 1;
  p.transform.map = [](const Vec& x, double theta) { return Vec{theta * x[0]}; };
  p.transform.jacobian = [](const Vec&, double theta) {
    Matrix j(1, 1);
    j(0, 0) = theta;
    return j;
  };
  p.transform.dtheta = [](const Vec& x, double) { return Vec{x[0]}; };

  p.performance.dims = 1;
  p.performance.eval = [](const Vec& y) { return indicator(y[0] < 1.0); };
  p.performance.tag = Smoothness::measurable_only;
  p.performance.bound = 1.0;

  p.analytic_derivative = [](double theta) {
    return -std::exp(-1.0 / theta) / (theta * theta);
  };

  p.verify_probes = {{1.0}, {2.0}};
  return p;
}

const std::vector<std::string>& builtin_problem_ids() {
  static const std::vector<std::string> ids = {
      "toy_shifted_exp",
      "toy_pushout",
      "rect2d",
      "linear1d",
  };
  return ids;
}

Problem make_problem(const std::string& id) {
  if (id == "toy_shifted_exp") return toy_shifted_exp();
  if (id == "toy_pushout") return toy_pushout();
  if (id == "rect2d") return rect2d();
  if (id == "linear1d") return linear1d();
  throw UnknownProblem("no builtin problem named \"" + id + "\"");
}

}  // namespace glrsens

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "glrsens/linalg.hpp"

namespace glrsens {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  int max_subdivisions = 2000;
  // Tail mass dropped per side when an infinite bound is capped at a quantile.
  double eps_tail = 1e-12;
};

// Globally adaptive Gauss-Kronrod (G7, K15) on [a, b]. `interior_breaks`
// seeds the initial partition; without breaks the interval starts as eight
// equal pieces so narrow features away from the nodes of a single panel are
// still seen. Throws Nonconvergence when the subdivision budget runs out.
double integrate_1d(const std::function<double(double)>& fn, double a, double b, double abs_tol,
                    int max_subdivisions, std::span<const double> interior_breaks = {});

// Tensor-product nesting of integrate_1d over a finite box, outermost axis
// first. breaks_per_axis, when given, must have one entry per axis.
double integrate_box(const std::function<double(const Vec&)>& fn, const Vec& lo, const Vec& hi,
                     double abs_tol, int max_subdivisions,
                     const std::vector<std::vector<double>>* breaks_per_axis = nullptr);

}  // namespace glrsens

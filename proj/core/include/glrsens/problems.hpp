#pragma once

#include <string>
#include <vector>

#include "glrsens/model.hpp"

namespace glrsens {

// Shifted-variable toy problem: X ~ Exp(theta) on [0, inf), g(x, theta) = x - theta,
// phi(y) = 1{y < 0}. Registers the push-out form Y ~ Exp(theta^2) and the
// closed-form derivative 2 theta exp(-theta^2).
Problem toy_shifted_exp();

// Push-out formulation of the same expectation: g(x, theta) = x / theta with a
// theta-independent image, so every surface term vanishes.
Problem toy_pushout();

// X uniform on [0,1]^2, g(x, theta) = (x1 + theta x2, x2), phi(y) = 1{y1 < 1/2}.
// Nonzero boundary flux; ground truth comes from the derivative oracle only.
Problem rect2d();

// theta-free Exp(1) input with the linear map g(x, theta) = theta x.
Problem linear1d();

const std::vector<std::string>& builtin_problem_ids();

// Resolves a builtin id; throws UnknownProblem.
Problem make_problem(const std::string& id);

}  // namespace glrsens

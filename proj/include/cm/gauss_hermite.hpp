#pragma once

#include <vector>

namespace cm {

// Quadrature rule for expectations against the standard normal density:
//   E[g(f)] ~= sum_i weights[i] * g(nodes[i]).
// Nodes/weights come from the Golub-Welsch eigen decomposition of the
// Hermite Jacobi matrix, rescaled from weight exp(-x^2) to N(0,1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n >= 1; rules are cached per n (thread-safe).
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace cm

#pragma once

#include <functional>
#include <vector>

namespace cm {

using Objective = std::function<double(const std::vector<double>&)>;

// Central differences with step h_j = cbrt(eps) * max(1, |v_j|).
std::vector<double> finite_diff_gradient(const Objective& f,
                                         const std::vector<double>& v);

// Higher-order (4-point) stencil, used for cross-checks.
std::vector<double> finite_diff_gradient4(const Objective& f,
                                          const std::vector<double>& v);

struct OptimizerConfig {
  int max_iters = 500;
  double tol_grad = 1e-6;      // max-norm of the gradient
  double tol_obj = 1e-10;      // relative objective change
  int restarts = 0;            // extra perturbed starts
  double restart_scale = 0.05; // perturbation size for restarts
  int cl2_nodes = 40;          // quadrature nodes for CL(2) objectives
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// BFGS with backtracking Armijo line search; gradients by central
// differences. Minimizes f.
MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                             const OptimizerConfig& cfg);

}  // namespace cm

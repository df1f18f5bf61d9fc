#include "cm/optimize.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cm {

namespace {
const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());
}

std::vector<double> finite_diff_gradient(const Objective& f,
                                         const std::vector<double>& v) {
  std::vector<double> g(v.size());
  std::vector<double> x = v;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double h = kFdStep * std::max(1.0, std::fabs(v[j]));
    x[j] = v[j] + h;
    const double fp = f(x);
    x[j] = v[j] - h;
    const double fm = f(x);
    x[j] = v[j];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_diff_gradient: non-finite objective");
    }
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::vector<double> finite_diff_gradient4(const Objective& f,
                                          const std::vector<double>& v) {
  std::vector<double> g(v.size());
  std::vector<double> x = v;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double h = kFdStep * std::max(1.0, std::fabs(v[j]));
    x[j] = v[j] + 2.0 * h;
    const double f2p = f(x);
    x[j] = v[j] + h;
    const double f1p = f(x);
    x[j] = v[j] - h;
    const double f1m = f(x);
    x[j] = v[j] - 2.0 * h;
    const double f2m = f(x);
    x[j] = v[j];
    g[j] = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h);
  }
  return g;
}

MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                             const OptimizerConfig& cfg) {
  const long n = static_cast<long>(x0.size());
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), n);
  auto eval = [&](const Eigen::VectorXd& v) {
    return f(std::vector<double>(v.data(), v.data() + v.size()));
  };
  auto grad = [&](const Eigen::VectorXd& v) {
    std::vector<double> g =
        finite_diff_gradient(f, std::vector<double>(v.data(), v.data() + v.size()));
    return Eigen::Map<Eigen::VectorXd>(g.data(), n).eval();
  };

  double fx = eval(x);
  if (!std::isfinite(fx)) {
    throw std::runtime_error("minimize_bfgs: objective not finite at start");
  }
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  MinimizeResult result;
  int iter = 0;
  bool scaled = false;   // Shanno-Phua scaling applied once
  int small_changes = 0; // consecutive iterations with tiny improvement
  for (; iter < cfg.max_iters; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.tol_grad) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -(h_inv * g);
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // reset on loss of descent direction
      h_inv.setIdentity();
      scaled = false;
      dir = -g;
      slope = g.dot(dir);
    }
    // Cap the trial displacement so a poorly scaled direction cannot throw
    // the iterate into a degenerate region the search cannot leave.
    const double dir_norm = dir.lpNorm<Eigen::Infinity>();
    double step = std::min(1.0, 5.0 / std::max(dir_norm, 1e-300));
    // Backtracking Armijo search.
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = eval(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      Eigen::MatrixXd vmat =
          Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h_inv = vmat * h_inv * vmat.transpose() + rho * s * s.transpose();
    }
    const double rel_change = std::fabs(fx - f_new) / std::max(1.0, std::fabs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    small_changes = rel_change <= cfg.tol_obj ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      result.converged = true;
      ++iter;
      break;
    }
  }
  result.x.assign(x.data(), x.data() + n);
  result.value = fx;
  result.grad_norm = g.lpNorm<Eigen::Infinity>();
  result.iterations = iter;
  if (result.grad_norm <= cfg.tol_grad) result.converged = true;
  return result;
}

}  // namespace cm

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cm/estimator.hpp"

namespace cm {

struct HacConfig {
  double bandwidth = 0.0;  // 0 means the default 4 (T/100)^{2/9}
  int max_lag = -1;        // -1 means all available lags
  int quadrature_nodes = 40;  // CL2-mode probability derivatives
};

double default_bandwidth(int t_len);

// Quadratic spectral kernel, k(0) = 1.
double qs_kernel(double x);

struct CovarianceEstimate {
  Eigen::MatrixXd sigma;   // sandwich Var(sqrt(T)(theta_hat - theta))
  Eigen::MatrixXd j_hat;
  std::vector<double> se;  // sqrt(diag(sigma)/T)
  int lags_used = 0;
  bool truncated = false;  // lag sum truncated to keep the diagonal >= 0
  bool pseudo_inverse = false;
};

// Outer-product estimate of J0 in the statistical coordinates of `est`
// (log-probability gradients by central differences).
Eigen::MatrixXd estimate_j(const TransitionCounts& counts,
                           const EstimationResult& est, const HacConfig& cfg);

// Full sandwich covariance with quadratic-spectral-weighted lag terms.
CovarianceEstimate hac_covariance(const TransitionCounts& counts,
                                  const EstimationResult& est,
                                  const HacConfig& cfg);

// (theta_hat_j - null_j) / se_j; entries with se_j = 0 are NaN.
std::vector<double> t_statistics(const EstimationResult& est,
                                 const CovarianceEstimate& cov,
                                 const std::vector<double>& null_values);

}  // namespace cm

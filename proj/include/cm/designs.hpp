#pragma once

#include <cstdint>
#include <vector>

#include "cm/estimator.hpp"
#include "cm/params.hpp"

namespace cm {

// Monte-Carlo experiment configuration. Designs 1-3 differ only in how the
// loadings (beta_l) and idiosyncratic scales (sigma_l) grow with the rating:
//   design 1: sigma_l = beta_l = (1+r)^{l-1} / sqrt(2)
//   design 2: sigma_l = beta_l = (1+r)^{l-1} / sqrt(2 - rho^2)
//   design 3: beta_l = 1 / sqrt(2 - rho^2), sigma_l = beta_l (1+r)^{l-1}
struct DesignConfig {
  int design = 1;
  double rho = 0.0;
  double r = 0.05;  // per-grade growth rate of the scales
  int k_states = 8;
  std::vector<double> thresholds;  // c_2..c_K; empty = defaults
  std::vector<double> intercepts;  // delta_1..delta_{K-1}; empty = defaults
  std::vector<double> rebirth_row; // length K; empty = (0.5,0.3,0.2,0,...)
  int n_firms = 500;
  int t_len = 120;
  int n_replications = 25;
  std::uint64_t seed = 1;
  FitMode mode = FitMode::CL1;
  int n_workers = 0;  // 0 = hardware concurrency
};

std::vector<double> default_thresholds(int k_states);
std::vector<double> default_intercepts(int k_states);
std::vector<double> default_rebirth_row(int k_states);

ModelParams design_params(const DesignConfig& cfg);

}  // namespace cm

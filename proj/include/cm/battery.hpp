#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cm/designs.hpp"
#include "cm/hac.hpp"

namespace cm {

// Downgrade and default probabilities for a firm currently rated A
// (state 3), under the adjusted transition dynamics.
struct RiskMeasures {
  double dp1 = 0.0;             // P[downgraded at horizon 1 | A]
  double dp2 = 0.0;             // P[downgraded at horizon 2 | A]
  std::map<int, double> pd;     // horizon -> P[default | A]
};

// DP(h|A) = sum_{k>3} [P(h)]_{k,3}; PD(h|A) = [P(h)]_{K,3}. Horizon 1 is
// closed form, horizon 2 uses quadrature, longer horizons use n_paths
// Monte-Carlo factor paths.
RiskMeasures risk_measures(const ModelParams& theta,
                           const std::vector<int>& horizons, long n_paths,
                           Seed seed);

struct McSummary {
  std::vector<std::string> param_names;
  std::vector<double> true_values;
  std::vector<double> mean_abs_bias;
  std::vector<double> mean_se;                // sqrt(mean variance / T)
  std::vector<std::vector<double>> t_stats;   // one row per replication
  std::optional<RiskMeasures> risk_avg;       // full-parameter fits only
  int n_replications = 0;
  int failures = 0;

  std::string to_json() const;
  void write_csv(std::ostream& os) const;
};

// Simulate -> count -> fit -> HAC per replication, with per-replication
// derived seeds; the aggregate is a pure function of cfg regardless of the
// worker count.
McSummary run_battery(const DesignConfig& cfg, bool compute_risk = false);

}  // namespace cm

#include "cm/battery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cm/kernel.hpp"
#include "cm/panel.hpp"
#include "json.hpp"

namespace cm {

namespace {
constexpr std::uint64_t kBatteryStream = 9;
constexpr std::uint64_t kRiskStream = 11;
constexpr int kRatingA = 2;  // 0-based column of state 3
}  // namespace

RiskMeasures risk_measures(const ModelParams& theta,
                           const std::vector<int>& horizons, long n_paths,
                           Seed seed) {
  const int K = theta.k_states;
  if (K < 4) throw std::invalid_argument("risk_measures: needs rating A (K >= 4)");
  RiskMeasures rm;
  const Eigen::MatrixXd p1 = expected_matrix(theta, true);
  const Eigen::MatrixXd p2 =
      horizon2_matrix(theta, Integration::gauss_hermite(64), true);
  rm.dp1 = p1.col(kRatingA).tail(K - 3).sum();
  rm.dp2 = p2.col(kRatingA).tail(K - 3).sum();
  for (int h : horizons) {
    Eigen::MatrixXd ph;
    if (h == 1) {
      ph = p1;
    } else if (h == 2) {
      ph = p2;
    } else {
      ph = horizon_h_matrix(theta, h, n_paths,
                            derive(seed, kRiskStream, static_cast<std::uint64_t>(h)),
                            true);
    }
    rm.pd[h] = ph(K - 1, kRatingA);
  }
  return rm;
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::string error;
  std::vector<double> estimate;
  std::vector<double> se;
  std::vector<double> t;
  std::optional<RiskMeasures> risk;
};

RepOutcome run_replication(const DesignConfig& cfg, const ModelParams& theta0,
                           const std::vector<double>& truth, int rep,
                           bool compute_risk) {
  RepOutcome out;
  const Seed rep_seed =
      derive(Seed{cfg.seed}, kBatteryStream, static_cast<std::uint64_t>(rep));
  const RatingPanel panel = simulate_panel(theta0, cfg.n_firms, cfg.t_len,
                                           StationaryConditionalNoDefault{}, rep_seed);
  const TransitionCounts counts = build_counts(panel, TwoStepMode::Direct);

  OptimizerConfig ocfg;
  EstimationResult est;
  switch (cfg.mode) {
    case FitMode::CL1: est = fit_cl1(counts, ocfg); break;
    case FitMode::CL2: est = fit_cl2(counts, ocfg); break;
    case FitMode::CL12: est = fit_cl12(counts, ocfg); break;
    case FitMode::TwoStep: est = fit_two_step(counts, ocfg); break;
  }

  const CovarianceEstimate cov = hac_covariance(counts, est, HacConfig{});
  out.estimate = est.reduced ? stat_coords(*est.reduced) : stat_coords(*est.full);
  out.se = cov.se;
  out.t = t_statistics(est, cov, truth);
  if (compute_risk && est.full) {
    out.risk = risk_measures(*est.full, {1, 12, 24, 36}, 5000,
                             derive(rep_seed, kRiskStream));
  }
  out.ok = true;
  return out;
}

}  // namespace

McSummary run_battery(const DesignConfig& cfg, bool compute_risk) {
  const ModelParams theta0 = design_params(cfg);
  const ParamMode pm = cfg.mode == FitMode::CL1 ? ParamMode::CL1 : ParamMode::CL2;
  const std::vector<double> truth = cfg.mode == FitMode::CL1
                                        ? stat_coords(cl1_reduce(theta0))
                                        : stat_coords(theta0);

  McSummary out;
  out.param_names = stat_coord_names(pm, cfg.k_states);
  out.true_values = truth;
  out.n_replications = cfg.n_replications;

  std::vector<RepOutcome> reps(static_cast<std::size_t>(cfg.n_replications));
  int n_workers = cfg.n_workers > 0
                      ? cfg.n_workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min(n_workers, cfg.n_replications));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= cfg.n_replications) return;
      RepOutcome& slot = reps[static_cast<std::size_t>(rep)];
      try {
        slot = run_replication(cfg, theta0, truth, rep, compute_risk);
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregate in replication order so the summary does not depend on the
  // worker count.
  const std::size_t d = truth.size();
  out.mean_abs_bias.assign(d, 0.0);
  out.mean_se.assign(d, 0.0);
  RiskMeasures risk_sum;
  int n_ok = 0;
  int n_risk = 0;
  for (const RepOutcome& rep : reps) {
    if (!rep.ok) {
      ++out.failures;
      continue;
    }
    ++n_ok;
    for (std::size_t j = 0; j < d; ++j) {
      out.mean_abs_bias[j] += std::fabs(rep.estimate[j] - truth[j]);
      out.mean_se[j] += rep.se[j] * rep.se[j];  // average the variances
    }
    out.t_stats.push_back(rep.t);
    if (rep.risk) {
      ++n_risk;
      risk_sum.dp1 += rep.risk->dp1;
      risk_sum.dp2 += rep.risk->dp2;
      for (const auto& [h, v] : rep.risk->pd) risk_sum.pd[h] += v;
    }
  }
  if (n_ok == 0) throw std::runtime_error("run_battery: every replication failed");
  for (std::size_t j = 0; j < d; ++j) {
    out.mean_abs_bias[j] /= n_ok;
    out.mean_se[j] = std::sqrt(out.mean_se[j] / n_ok);
  }
  if (n_risk > 0) {
    risk_sum.dp1 /= n_risk;
    risk_sum.dp2 /= n_risk;
    for (auto& [h, v] : risk_sum.pd) v /= n_risk;
    out.risk_avg = risk_sum;
  }
  return out;
}

std::string McSummary::to_json() const {
  nlohmann::json j;
  j["n_replications"] = n_replications;
  j["failures"] = failures;
  j["param_names"] = param_names;
  j["true_values"] = true_values;
  j["mean_abs_bias"] = mean_abs_bias;
  j["mean_se"] = mean_se;
  j["t_stats"] = t_stats;
  if (risk_avg) {
    nlohmann::json r;
    r["dp1"] = risk_avg->dp1;
    r["dp2"] = risk_avg->dp2;
    for (const auto& [h, v] : risk_avg->pd) r["pd"][std::to_string(h)] = v;
    j["risk_avg"] = r;
  }
  return j.dump(2);
}

void McSummary::write_csv(std::ostream& os) const {
  os << "param,true_value,mean_abs_bias,mean_se\n";
  os.precision(17);
  for (std::size_t j = 0; j < param_names.size(); ++j) {
    os << param_names[j] << ',' << true_values[j] << ',' << mean_abs_bias[j]
       << ',' << mean_se[j] << '\n';
  }
}

}  // namespace cm

// Command-line front end: simulate panels, print transition matrices,
// estimate parameters, run Monte-Carlo batteries, and compute risk measures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cm/battery.hpp"
#include "cm/designs.hpp"
#include "cm/kernel.hpp"
#include "cm/panel.hpp"

namespace {

namespace fs = std::filesystem;

struct OutputFormat {
  bool paper = false;  // percentages, 2 decimals
};

void write_matrix_csv(const Eigen::MatrixXd& m, const fs::path& file,
                      const OutputFormat& fmt) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  if (fmt.paper) {
    os << std::fixed;
    os.precision(2);
  } else {
    os.precision(17);
  }
  const double scale = fmt.paper ? 100.0 : 1.0;
  for (long k = 0; k < m.rows(); ++k) {
    for (long l = 0; l < m.cols(); ++l) {
      if (l) os << ',';
      os << m(k, l) * scale;
    }
    os << '\n';
  }
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.precision(17);
  return os;
}

cm::FitMode parse_mode(const std::string& s) {
  if (s == "cl1") return cm::FitMode::CL1;
  if (s == "cl2") return cm::FitMode::CL2;
  if (s == "cl12") return cm::FitMode::CL12;
  if (s == "two-step") return cm::FitMode::TwoStep;
  throw CLI::ValidationError("--mode", "expected cl1|cl2|cl12|two-step");
}

void add_design_options(CLI::App* cmd, cm::DesignConfig& cfg) {
  cmd->add_option("--design", cfg.design, "Design id (1|2|3)")
      ->check(CLI::Range(1, 3));
  cmd->add_option("--rho", cfg.rho, "Factor autocorrelation")
      ->check(CLI::Range(-0.999, 0.999));
  cmd->add_option("--growth", cfg.r, "Per-grade scale growth rate");
  cmd->add_option("--k", cfg.k_states, "Number of rating states")
      ->check(CLI::Range(2, 64));
}

int cmd_simulate(const cm::DesignConfig& cfg, const std::string& out_dir,
                 bool keep_scores) {
  fs::create_directories(out_dir);
  const cm::ModelParams theta = cm::design_params(cfg);
  const cm::RatingPanel panel =
      cm::simulate_panel(theta, cfg.n_firms, cfg.t_len,
                         cm::StationaryConditionalNoDefault{},
                         cm::Seed{cfg.seed}, keep_scores);
  {
    auto os = open_out(fs::path(out_dir) / "panel.csv");
    cm::write_panel_csv(panel, os);
  }
  {
    auto os = open_out(fs::path(out_dir) / "factor.csv");
    cm::write_factor_csv(*panel.factor, os);
  }
  std::cout << "wrote " << out_dir << "/panel.csv (" << cfg.n_firms << " firms, "
            << cfg.t_len << " dates)\n";
  return 0;
}

int cmd_matrices(const cm::DesignConfig& cfg, int horizon, int nodes,
                 const std::string& out_dir, const OutputFormat& fmt) {
  fs::create_directories(out_dir);
  const cm::ModelParams theta = cm::design_params(cfg);
  const Eigen::MatrixXd p1 = cm::expected_matrix(theta, true);
  write_matrix_csv(p1, fs::path(out_dir) / "matrices_h1.csv", fmt);

  const Eigen::VectorXd pi = cm::stationary_distribution(p1);
  write_matrix_csv(pi, fs::path(out_dir) / "stationary.csv", fmt);

  if (horizon >= 2) {
    const Eigen::MatrixXd p2 =
        cm::horizon2_matrix(theta, cm::Integration::gauss_hermite(nodes), true);
    write_matrix_csv(p2, fs::path(out_dir) / "matrices_h2.csv", fmt);
    write_matrix_csv((p1 * p1).eval(),
                     fs::path(out_dir) / "matrices_h1_squared.csv", fmt);
  }
  std::cout << "wrote matrices to " << out_dir << "/\n";
  return 0;
}

int cmd_estimate(const std::string& panel_file, const std::string& mode_str,
                 int k_states, bool with_hac, const std::string& out_dir) {
  std::ifstream is(panel_file);
  if (!is) throw std::runtime_error("cannot read " + panel_file);
  const cm::RatingPanel panel = cm::read_panel_csv(is, k_states);
  const cm::FitMode mode = parse_mode(mode_str);
  const cm::TransitionCounts counts =
      cm::build_counts(panel, cm::TwoStepMode::Direct);

  cm::OptimizerConfig ocfg;
  cm::EstimationResult est;
  switch (mode) {
    case cm::FitMode::CL1: est = cm::fit_cl1(counts, ocfg); break;
    case cm::FitMode::CL2: est = cm::fit_cl2(counts, ocfg); break;
    case cm::FitMode::CL12: est = cm::fit_cl12(counts, ocfg); break;
    case cm::FitMode::TwoStep: est = cm::fit_two_step(counts, ocfg); break;
  }

  std::ostringstream json;
  json << est.to_json();
  if (with_hac) {
    const cm::CovarianceEstimate cov =
        cm::hac_covariance(counts, est, cm::HacConfig{});
    std::string body = json.str();
    // splice the standard errors into the result object
    std::ostringstream se;
    se << ",\n  \"se\": [";
    se.precision(17);
    for (std::size_t j = 0; j < cov.se.size(); ++j) {
      if (j) se << ", ";
      se << cov.se[j];
    }
    se << "]";
    body.insert(body.rfind('}'), se.str() + "\n");
    json.str(body);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    auto os = open_out(fs::path(out_dir) / "estimate.json");
    os << json.str() << '\n';
  }
  std::cout << json.str() << '\n';
  return est.converged ? 0 : 2;
}

int cmd_battery(const cm::DesignConfig& cfg, bool with_risk,
                const std::string& out_dir) {
  const cm::McSummary summary = cm::run_battery(cfg, with_risk);
  fs::create_directories(out_dir);
  {
    auto os = open_out(fs::path(out_dir) / "summary.csv");
    summary.write_csv(os);
  }
  {
    auto os = open_out(fs::path(out_dir) / "summary.json");
    os << summary.to_json() << '\n';
  }
  {
    auto os = open_out(fs::path(out_dir) / "tstats.csv");
    os << "replication";
    for (const auto& name : summary.param_names) os << ',' << name;
    os << '\n';
    for (std::size_t r = 0; r < summary.t_stats.size(); ++r) {
      os << r;
      for (double t : summary.t_stats[r]) os << ',' << t;
      os << '\n';
    }
  }
  std::cout << "battery done: " << summary.t_stats.size() << " replications ok, "
            << summary.failures << " failed; results in " << out_dir << "/\n";
  return summary.failures == cfg.n_replications ? 1 : 0;
}

int cmd_risk(const cm::DesignConfig& cfg, long paths, const std::string& out_dir,
             const OutputFormat& fmt) {
  const cm::ModelParams theta = cm::design_params(cfg);
  const cm::RiskMeasures rm =
      cm::risk_measures(theta, {1, 12, 24, 36}, paths, cm::Seed{cfg.seed});
  fs::create_directories(out_dir);
  auto os = open_out(fs::path(out_dir) / "risk.csv");
  const double scale = fmt.paper ? 100.0 : 1.0;
  if (fmt.paper) {
    os << std::fixed;
    os.precision(2);
  }
  os << "measure,value\n";
  os << "dp1," << rm.dp1 * scale << '\n';
  os << "dp2," << rm.dp2 * scale << '\n';
  for (const auto& [h, v] : rm.pd) os << "pd" << h << ',' << v * scale << '\n';
  std::cout << "wrote " << out_dir << "/risk.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-factor rating migration model"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Plain key=value config file with [subcommand] sections");

  cm::DesignConfig cfg;
  OutputFormat fmt;
  std::string out_dir = "out";
  std::string panel_file;
  std::string mode_str = "cl1";
  bool keep_scores = false;
  bool with_hac = false;
  bool with_risk = false;
  long risk_paths = 5000;
  int horizon = 2;
  int nodes = 64;

  auto* sim = app.add_subcommand("simulate", "Simulate a rating panel");
  add_design_options(sim, cfg);
  sim->add_option("--n", cfg.n_firms, "Firms")->check(CLI::PositiveNumber);
  sim->add_option("--t", cfg.t_len, "Dates")->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "Base seed");
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_flag("--keep-scores", keep_scores, "Also write latent scores");

  auto* mat = app.add_subcommand("matrices", "Exact transition matrices");
  add_design_options(mat, cfg);
  mat->add_option("--horizon", horizon, "Max horizon (1 or 2)")->check(CLI::Range(1, 2));
  mat->add_option("--nodes", nodes, "Quadrature nodes")->check(CLI::PositiveNumber);
  mat->add_option("--out", out_dir, "Output directory");
  mat->add_flag("--paper-format", fmt.paper, "Percent, 2 decimals");

  auto* est = app.add_subcommand("estimate", "Fit the model to a panel CSV");
  est->add_option("--panel", panel_file, "Panel CSV (firm,t,rating)")->required();
  est->add_option("--mode", mode_str, "cl1|cl2|cl12|two-step");
  est->add_option("--k", cfg.k_states, "Number of rating states");
  est->add_flag("--hac", with_hac, "Append HAC standard errors");
  est->add_option("--out", out_dir, "Output directory (optional)")->default_val("");

  auto* bat = app.add_subcommand("battery", "Monte-Carlo replication battery");
  add_design_options(bat, cfg);
  bat->add_option("--n", cfg.n_firms, "Firms")->check(CLI::PositiveNumber);
  bat->add_option("--t", cfg.t_len, "Dates")->check(CLI::PositiveNumber);
  bat->add_option("--reps", cfg.n_replications, "Replications")->check(CLI::PositiveNumber);
  bat->add_option("--seed", cfg.seed, "Base seed");
  bat->add_option("--mode", mode_str, "cl1|cl2|cl12|two-step");
  bat->add_option("--workers", cfg.n_workers, "Worker threads (0 = auto)");
  bat->add_flag("--risk", with_risk, "Average fitted risk measures");
  bat->add_option("--out", out_dir, "Output directory");

  auto* risk = app.add_subcommand("risk", "Risk measures at the true parameters");
  add_design_options(risk, cfg);
  risk->add_option("--paths", risk_paths, "Factor paths for long horizons")
      ->check(CLI::PositiveNumber);
  risk->add_option("--seed", cfg.seed, "Base seed");
  risk->add_option("--out", out_dir, "Output directory");
  risk->add_flag("--paper-format", fmt.paper, "Percent, 2 decimals");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(cfg, out_dir, keep_scores);
    if (*mat) return cmd_matrices(cfg, horizon, nodes, out_dir, fmt);
    if (*est) return cmd_estimate(panel_file, mode_str, cfg.k_states, with_hac, out_dir);
    if (*bat) {
      cfg.mode = parse_mode(mode_str);
      return cmd_battery(cfg, with_risk, out_dir);
    }
    if (*risk) return cmd_risk(cfg, risk_paths, out_dir, fmt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

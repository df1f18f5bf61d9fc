#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "cm/designs.hpp"
#include "cm/gauss_hermite.hpp"
#include "cm/kernel.hpp"
#include "cm/normal.hpp"
#include "cm/panel.hpp"
#include "doctest.h"

using namespace cm;

namespace {

ModelParams design(int d, double rho) {
  DesignConfig cfg;
  cfg.design = d;
  cfg.rho = rho;
  return design_params(cfg);
}

}  // namespace

TEST_CASE("factor path is stationary AR(1)") {
  const double rho = 0.6;
  FactorPath path = simulate_factor(rho, 200000, Seed{21});
  REQUIRE(path.f.size() == 200000);
  double mean = 0, var = 0, cov = 0;
  for (double x : path.f) mean += x;
  mean /= static_cast<double>(path.f.size());
  for (std::size_t t = 0; t < path.f.size(); ++t) {
    var += (path.f[t] - mean) * (path.f[t] - mean);
    if (t) cov += (path.f[t] - mean) * (path.f[t - 1] - mean);
  }
  var /= static_cast<double>(path.f.size());
  cov /= static_cast<double>(path.f.size() - 1);
  CHECK(std::fabs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(cov / var == doctest::Approx(rho).epsilon(0.02));
}

TEST_CASE("factor path is reproducible and shared by the panel") {
  FactorPath a = simulate_factor(0.4, 50, Seed{77});
  FactorPath b = simulate_factor(0.4, 50, Seed{77});
  CHECK(a.f == b.f);

  ModelParams p = design(3, 0.4);
  RatingPanel panel = simulate_panel(p, 10, 50, StationaryConditionalNoDefault{},
                                     Seed{77});
  REQUIRE(panel.factor.has_value());
  CHECK(panel.factor->f == a.f);
}

TEST_CASE("panel ratings stay in range and default is never initial") {
  ModelParams p = design(3, 0.7);
  RatingPanel panel = simulate_panel(p, 300, 80, StationaryConditionalNoDefault{},
                                     Seed{5});
  for (int i = 0; i < panel.n_firms; ++i) {
    CHECK(panel.rating(i, 0) != 8);
    for (int t = 0; t < panel.t_len; ++t) {
      CHECK(panel.rating(i, t) >= 1);
      CHECK(panel.rating(i, t) <= 8);
    }
  }
}

TEST_CASE("fixed and custom initial distributions") {
  ModelParams p = design(1, 0.0);
  RatingPanel fixed = simulate_panel(p, 50, 4, FixedRating{2}, Seed{9});
  for (int i = 0; i < 50; ++i) CHECK(fixed.rating(i, 0) == 2);

  InitialDistribution init;
  init.probs = {0, 0, 0, 1, 0, 0, 0, 0};
  RatingPanel custom = simulate_panel(p, 50, 4, init, Seed{9});
  for (int i = 0; i < 50; ++i) CHECK(custom.rating(i, 0) == 4);
}

TEST_CASE("pooled transition frequencies match the expected matrix") {
  ModelParams p = design(3, 0.4);
  const int n = 1000, t_len = 240;
  RatingPanel panel =
      simulate_panel(p, n, t_len, StationaryConditionalNoDefault{}, Seed{2024});
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(8, 8);
  for (int i = 0; i < n; ++i)
    for (int t = 1; t < t_len; ++t)
      counts(panel.rating(i, t) - 1, panel.rating(i, t - 1) - 1) += 1.0;
  Eigen::MatrixXd expected = expected_matrix(p, true);
  // the systematic factor moves all firms together, so the sampling error of
  // a pooled frequency is dominated by the time-series variance of p_kl(f_t);
  // compute Var_f[p_kl(f)] by quadrature and inflate for AR(1) dependence
  const GaussHermiteRule& rule = gauss_hermite(64);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(8, 8);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    Eigen::MatrixXd m = conditional_matrix(p, rule.nodes[q], true);
    second += rule.weights[q] * m.cwiseProduct(m);
  }
  const double t_eff = (t_len - 1) * (1 - p.rho) / (1 + p.rho);
  for (int l = 0; l < 8; ++l) {
    const double n_l = counts.col(l).sum();
    REQUIRE(n_l > 0);
    for (int k = 0; k < 8; ++k) {
      const double phat = counts(k, l) / n_l;
      const double pkl = expected(k, l);
      const double var_f = std::max(second(k, l) - pkl * pkl, 0.0);
      const double se = std::sqrt(var_f / t_eff +
                                  std::max(pkl * (1 - pkl), 1e-8) / n_l);
      CHECK(std::fabs(phat - pkl) < std::max(4 * se, 2e-3));
    }
  }
}

TEST_CASE("latent scores are consistent with the observed ratings") {
  ModelParams p = design(3, 0.4);
  RatingPanel panel = simulate_panel(p, 40, 60, StationaryConditionalNoDefault{},
                                     Seed{31}, true);
  REQUIRE(!panel.scores.empty());
  for (int i = 0; i < panel.n_firms; ++i) {
    for (int t = 1; t < panel.t_len; ++t) {
      if (panel.rating(i, t - 1) == 8) {
        CHECK(std::isnan(panel.score(i, t)));  // rebirth draw, no score
        continue;
      }
      const int k = panel.rating(i, t);
      const double y = panel.score(i, t);
      CHECK(y >= p.threshold(k));
      CHECK(y < p.threshold(k + 1));
    }
  }
}

TEST_CASE("stability series matches the conditional stay probability") {
  ModelParams p = design(3, 0.4);
  RatingPanel panel = simulate_panel(p, 5, 40, StationaryConditionalNoDefault{},
                                     Seed{13});
  const std::vector<double> s = stability_series(panel, p, 2);
  REQUIRE(s.size() == 40);
  for (int t = 1; t < 40; ++t) {
    const int l = panel.rating(2, t - 1);
    const double f = panel.factor->f[static_cast<std::size_t>(t)];
    double expected;
    if (l == 8) {
      expected = p.rebirth_row[7];
    } else {
      const double lo = (p.threshold(l) - p.delta[l - 1] - p.beta[l - 1] * f) /
                        p.sigma[l - 1];
      const double hi = (p.threshold(l + 1) - p.delta[l - 1] - p.beta[l - 1] * f) /
                        p.sigma[l - 1];
      expected = norm_cdf(hi) - norm_cdf(lo);
    }
    CHECK(s[static_cast<std::size_t>(t)] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("stability value example at f=0, previous rating 2") {
  // frozen: Phi((1.5-1)/sigma_2) - Phi((0-1)/sigma_2), sigma_2 = 1.05/sqrt(1.84)
  ModelParams p = design(3, 0.4);
  const double f = 0.0;
  const double lo = (p.threshold(2) - p.delta[1] - p.beta[1] * f) / p.sigma[1];
  const double hi = (p.threshold(3) - p.delta[1] - p.beta[1] * f) / p.sigma[1];
  CHECK(norm_cdf(hi) - norm_cdf(lo) ==
        doctest::Approx(0.6426389866514536).epsilon(1e-12));
}

TEST_CASE("panel simulation is deterministic and CSV round-trips") {
  ModelParams p = design(2, 0.4);
  RatingPanel a = simulate_panel(p, 30, 25, StationaryConditionalNoDefault{},
                                 Seed{111}, true);
  RatingPanel b = simulate_panel(p, 30, 25, StationaryConditionalNoDefault{},
                                 Seed{111}, true);
  CHECK(a.ratings == b.ratings);
  REQUIRE(a.scores.size() == b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    const bool both_nan = std::isnan(a.scores[i]) && std::isnan(b.scores[i]);
    CHECK((both_nan || a.scores[i] == b.scores[i]));
  }

  std::stringstream ss;
  write_panel_csv(a, ss);
  RatingPanel c = read_panel_csv(ss, 8);
  CHECK(c.n_firms == a.n_firms);
  CHECK(c.t_len == a.t_len);
  CHECK(c.ratings == a.ratings);
}

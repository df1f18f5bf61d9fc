#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "cm/designs.hpp"
#include "cm/gauss_hermite.hpp"
#include "cm/kernel.hpp"
#include "cm/normal.hpp"
#include "doctest.h"

using namespace cm;

namespace {

ModelParams design(int d, double rho) {
  DesignConfig cfg;
  cfg.design = d;
  cfg.rho = rho;
  return design_params(cfg);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("normal cdf/quantile basics") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {1e-12, 1e-4, 0.3, 0.5, 0.72, 1 - 1e-10}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS((void)norm_quantile(1.0), std::domain_error);
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
  const GaussHermiteRule& rule = gauss_hermite(20);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m0 += w;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("conditional matrix at f=0, design 3 rho=0.4") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd m = conditional_matrix(p, 0.0, true);
  // frozen: Phi(0.5/sigma_1) - Phi(-infty) with sigma_1 = 1/sqrt(1.84)
  CHECK(m(0, 0) == doctest::Approx(0.7511880134121962).epsilon(1e-12));
  for (int l = 0; l < 8; ++l) {
    CHECK(m.col(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.col(l).minCoeff() >= 0.0);
  }
  // adjusted default column is the rebirth row
  CHECK(m(0, 7) == doctest::Approx(0.5));
  CHECK(m(7, 7) == doctest::Approx(0.0));
  Eigen::MatrixXd abs = conditional_matrix(p, 0.0, false);
  CHECK(abs(7, 7) == doctest::Approx(1.0));
}

TEST_CASE("expected matrix closed form matches the frozen oracle") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd m = expected_matrix(p, true);
  CHECK(m(0, 0) == doctest::Approx(0.6842380857546879).epsilon(1e-12));
  CHECK(m(1, 0) == doctest::Approx(0.28822748918491614).epsilon(1e-12));
  CHECK(m(2, 0) == doctest::Approx(0.027140576416382234).epsilon(1e-10));
  for (int l = 0; l < 8; ++l)
    CHECK(m.col(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reduced expected matrix agrees with the structural one") {
  ModelParams p = design(2, 0.7);
  Eigen::MatrixXd full = expected_matrix(p, true);
  Eigen::MatrixXd red = expected_matrix_reduced(cl1_reduce(p), p.rebirth_row);
  CHECK(max_abs(full - red) < 1e-13);
}

TEST_CASE("horizon-2 factorizes when the factor is iid") {
  for (int d : {1, 2, 3}) {
    ModelParams p = design(d, 0.0);
    Eigen::MatrixXd p1 = expected_matrix(p, true);
    Eigen::MatrixXd p2 = horizon2_matrix(p, Integration::gauss_hermite(64), true);
    CHECK(max_abs(p2 - p1 * p1) < 1e-10);
  }
}

TEST_CASE("horizon-2 factorizes when there is no systematic risk") {
  ModelParams p = design(3, 0.4);
  for (double& b : p.beta) b = 0.0;
  Eigen::MatrixXd p1 = expected_matrix(p, true);
  Eigen::MatrixXd p2 = horizon2_matrix(p, Integration::gauss_hermite(64), true);
  CHECK(max_abs(p2 - p1 * p1) < 1e-10);
}

TEST_CASE("horizon-2 quadrature matches an independent adaptive integral") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd p2 = horizon2_matrix(p, Integration::gauss_hermite(64), true);
  // frozen scipy.integrate.quad oracles
  CHECK(p2(0, 0) == doctest::Approx(0.530165079295658).epsilon(1e-9));
  CHECK(p2(1, 0) == doctest::Approx(0.3177029359157195).epsilon(1e-9));
}

TEST_CASE("horizon-2 quadrature converges in the node count") {
  for (int d : {1, 2, 3}) {
    ModelParams p = design(d, 0.4);
    Eigen::MatrixXd a = horizon2_matrix(p, Integration::gauss_hermite(32), true);
    Eigen::MatrixXd b = horizon2_matrix(p, Integration::gauss_hermite(64), true);
    CHECK(max_abs(a - b) < 1e-8);
  }
}

TEST_CASE("Monte-Carlo horizon-2 agrees with quadrature") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd gh = horizon2_matrix(p, Integration::gauss_hermite(64), true);
  Eigen::MatrixXd mc =
      horizon2_matrix(p, Integration::monte_carlo(200000, Seed{11}), true);
  CHECK(max_abs(gh - mc) < 4e-3);
}

TEST_CASE("horizon-h closed form at h=1 and factorization at rho=0") {
  ModelParams p = design(2, 0.0);
  Eigen::MatrixXd p1 = expected_matrix(p, true);
  CHECK(max_abs(horizon_h_matrix(p, 1, 10, Seed{3}, true) - p1) == 0.0);
  Eigen::MatrixXd p12 = horizon_h_matrix(p, 12, 40000, Seed{5}, true);
  Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(8, 8);
  for (int i = 0; i < 12; ++i) pow = p1 * pow;
  CHECK(max_abs(p12 - pow) < 5e-3);
  for (int l = 0; l < 8; ++l)
    CHECK(p12.col(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("horizon-h Monte-Carlo is seed-deterministic") {
  ModelParams p = design(3, 0.7);
  Eigen::MatrixXd a = horizon_h_matrix(p, 6, 2000, Seed{9}, true);
  Eigen::MatrixXd b = horizon_h_matrix(p, 6, 2000, Seed{9}, true);
  CHECK(max_abs(a - b) == 0.0);
}

TEST_CASE("stationary distribution of the adjusted matrix") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd m = expected_matrix(p, true);
  Eigen::VectorXd pi = stationary_distribution(m);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs(m * pi - pi) < 1e-12);
  const double expected[8] = {0.1451, 0.1666, 0.1747, 0.1609,
                              0.1415, 0.1119, 0.0699, 0.0294};
  for (int k = 0; k < 8; ++k) CHECK(std::fabs(pi(k) - expected[k]) < 1e-4);
}

TEST_CASE("stationary distribution rejects the absorbing chain") {
  ModelParams p = design(3, 0.4);
  Eigen::MatrixXd m = expected_matrix(p, false);
  CHECK_THROWS_AS((void)stationary_distribution(m), std::runtime_error);
}

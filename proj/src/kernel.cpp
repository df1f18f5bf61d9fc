#include "cm/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "cm/gauss_hermite.hpp"
#include "cm/normal.hpp"

namespace cm {

namespace {

void fill_default_column(Eigen::MatrixXd& m, const std::vector<double>& rebirth,
                         bool adjusted) {
  const long K = m.rows();
  m.col(K - 1).setZero();
  if (adjusted) {
    for (long k = 0; k < K; ++k) m(k, K - 1) = rebirth[static_cast<std::size_t>(k)];
  } else {
    m(K - 1, K - 1) = 1.0;
  }
}

// One-step column for origin l (1-based) given location shift and scale:
// entries Phi((c_{k+1} - loc)/scale) - Phi((c_k - loc)/scale).
template <typename Thresholds>
void fill_probit_column(Eigen::MatrixXd& m, long col, const Thresholds& thr,
                        double loc, double scale) {
  const long K = m.rows();
  double lo = 0.0;  // Phi(-inf)
  for (long k = 0; k < K; ++k) {
    const double hi =
        k == K - 1 ? 1.0 : norm_cdf((thr(static_cast<int>(k) + 2) - loc) / scale);
    m(k, col) = hi - lo;
    lo = hi;
  }
}

// Lag-smoothed one-step matrix A of the horizon-2 integrand: transition
// between t-1 and t given f_{t-1} = f, with eta_t integrated out.
Eigen::MatrixXd smoothed_matrix(const ModelParams& theta, double f,
                                bool adjusted) {
  const long K = theta.k_states;
  Eigen::MatrixXd m(K, K);
  const double r2 = 1.0 - theta.rho * theta.rho;
  for (long l = 0; l < K - 1; ++l) {
    const double b = theta.beta[static_cast<std::size_t>(l)];
    const double s = theta.sigma[static_cast<std::size_t>(l)];
    const double scale = std::sqrt(s * s + b * b * r2);
    const double loc = theta.delta[static_cast<std::size_t>(l)] + b * theta.rho * f;
    fill_probit_column(m, l, [&](int k) { return theta.threshold(k); }, loc,
                       scale);
  }
  fill_default_column(m, theta.rebirth_row, adjusted);
  return m;
}

}  // namespace

Eigen::MatrixXd conditional_matrix(const ModelParams& theta, double f,
                                   bool adjusted) {
  const long K = theta.k_states;
  Eigen::MatrixXd m(K, K);
  for (long l = 0; l < K - 1; ++l) {
    const double loc = theta.delta[static_cast<std::size_t>(l)] +
                       theta.beta[static_cast<std::size_t>(l)] * f;
    fill_probit_column(m, l, [&](int k) { return theta.threshold(k); }, loc,
                       theta.sigma[static_cast<std::size_t>(l)]);
  }
  fill_default_column(m, theta.rebirth_row, adjusted);
  return m;
}

Eigen::MatrixXd expected_matrix(const ModelParams& theta, bool adjusted) {
  const long K = theta.k_states;
  Eigen::MatrixXd m(K, K);
  for (long l = 0; l < K - 1; ++l) {
    const double scale = theta.gamma1_cl1(static_cast<int>(l) + 1);
    fill_probit_column(m, l, [&](int k) { return theta.threshold(k); },
                       theta.delta[static_cast<std::size_t>(l)], scale);
  }
  fill_default_column(m, theta.rebirth_row, adjusted);
  return m;
}

Eigen::MatrixXd expected_matrix_reduced(const ReducedParamsCL1& r,
                                        const std::vector<double>& rebirth) {
  const long K = r.k_states;
  Eigen::MatrixXd m(K, K);
  for (long l = 0; l < K - 1; ++l) {
    fill_probit_column(m, l, [&](int k) { return r.threshold(k); },
                       r.delta[static_cast<std::size_t>(l)],
                       r.gamma_at(static_cast<int>(l) + 1));
  }
  fill_default_column(m, rebirth, true);
  return m;
}

Eigen::MatrixXd horizon2_matrix(const ModelParams& theta,
                                const Integration& integ, bool adjusted) {
  const long K = theta.k_states;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(K, K);
  if (integ.kind == Integration::Kind::GaussHermite) {
    if (integ.n_nodes < 1) {
      throw std::invalid_argument("horizon2_matrix: n_nodes < 1");
    }
    const GaussHermiteRule& rule = gauss_hermite(integ.n_nodes);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double f = rule.nodes[i];
      acc.noalias() += rule.weights[i] * (smoothed_matrix(theta, f, adjusted) *
                                          conditional_matrix(theta, f, adjusted));
    }
  } else {
    if (integ.n_paths < 1) {
      throw std::invalid_argument("horizon2_matrix: n_paths < 1");
    }
    for (long s = 0; s < integ.n_paths; ++s) {
      const double f = normal_at(derive(integ.seed, static_cast<std::uint64_t>(s)), 0);
      acc.noalias() += smoothed_matrix(theta, f, adjusted) *
                       conditional_matrix(theta, f, adjusted);
    }
    acc /= static_cast<double>(integ.n_paths);
  }
  return acc;
}

Eigen::MatrixXd horizon_h_matrix(const ModelParams& theta, int h, long n_paths,
                                 Seed seed, bool adjusted) {
  if (h < 1) throw std::invalid_argument("horizon_h_matrix: h < 1");
  if (h == 1) return expected_matrix(theta, adjusted);
  if (n_paths < 1) throw std::invalid_argument("horizon_h_matrix: n_paths < 1");
  const long K = theta.k_states;
  const double sd_innov = std::sqrt(1.0 - theta.rho * theta.rho);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(K, K);
  for (long s = 0; s < n_paths; ++s) {
    Stream rng(derive(seed, static_cast<std::uint64_t>(s)));
    double f = rng.normal();  // stationary start
    Eigen::MatrixXd prod = conditional_matrix(theta, f, adjusted);
    for (int step = 1; step < h; ++step) {
      f = theta.rho * f + sd_innov * rng.normal();
      prod = conditional_matrix(theta, f, adjusted) * prod;
    }
    acc += prod;
  }
  return acc / static_cast<double>(n_paths);
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p_adjusted) {
  const long K = p_adjusted.rows();
  if (p_adjusted.cols() != K) {
    throw std::invalid_argument("stationary_distribution: matrix not square");
  }
  for (long k = 0; k < K; ++k) {
    if (p_adjusted(k, k) >= 1.0 - 1e-12) {
      throw std::runtime_error(
          "stationary_distribution: chain has an absorbing state");
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(K, K) - p_adjusted;
  // Uniqueness requires rank(I - P) = K - 1.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-9);
  if (lu.rank() != K - 1) {
    throw std::runtime_error(
        "stationary_distribution: invariant distribution is not unique");
  }
  a.row(K - 1).setOnes();  // replace one redundant equation by sum = 1
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  b(K - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(b);
  for (long k = 0; k < K; ++k) {
    if (pi(k) < -1e-9) {
      throw std::runtime_error("stationary_distribution: negative entry");
    }
    if (pi(k) < 0.0) pi(k) = 0.0;
  }
  pi /= pi.sum();
  return pi;
}

}  // namespace cm

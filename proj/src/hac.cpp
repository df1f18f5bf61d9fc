#include "cm/hac.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cm {

namespace {

const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

// Probability matrix as a function of the statistical coordinates, and the
// count objects the scores are built on (lag-1 or lag-2 analog).
struct ScoreContext {
  std::function<Eigen::MatrixXd(const std::vector<double>&)> probs;
  const Eigen::MatrixXd* n_agg = nullptr;
  const std::vector<Eigen::MatrixXd>* n_t = nullptr;
  std::vector<double> at;  // estimate in statistical coordinates
};

ScoreContext make_context(const TransitionCounts& counts,
                          const EstimationResult& est, const HacConfig& cfg) {
  ScoreContext ctx;
  const int K = counts.k_states;
  if (est.mode == FitMode::CL1) {
    if (!est.reduced) throw std::invalid_argument("hac: CL1 result lacks reduced params");
    ctx.at = stat_coords(*est.reduced);
    const std::vector<double> rebirth = est.rebirth_row;
    ctx.probs = [K, rebirth](const std::vector<double>& v) {
      ReducedParamsCL1 r;
      r.k_states = K;
      const std::size_t n_c = static_cast<std::size_t>(K) - 2;
      r.c.assign(v.begin(), v.begin() + static_cast<long>(n_c));
      r.delta.assign(v.begin() + static_cast<long>(n_c),
                     v.begin() + static_cast<long>(n_c + K - 1));
      r.gamma.assign(v.begin() + static_cast<long>(n_c + K - 1), v.end());
      return expected_matrix_reduced(r, rebirth);
    };
    ctx.n_agg = &counts.n1;
    ctx.n_t = &counts.n1_t;
  } else {
    if (!est.full) throw std::invalid_argument("hac: result lacks full params");
    if (!counts.has_two_step()) {
      throw std::invalid_argument("hac: CL2 mode needs two-step counts");
    }
    ctx.at = stat_coords(*est.full);
    const std::vector<double> rebirth = est.full->rebirth_row;
    const int nodes = cfg.quadrature_nodes;
    ctx.probs = [K, rebirth, nodes](const std::vector<double>& v) {
      ModelParams p;
      p.k_states = K;
      p.rebirth_row = rebirth;
      const std::size_t n_c = static_cast<std::size_t>(K) - 2;
      p.c.resize(static_cast<std::size_t>(K) - 1);
      p.c[0] = 0.0;
      for (std::size_t i = 0; i < n_c; ++i) p.c[i + 1] = v[i];
      std::size_t pos = n_c;
      p.delta.assign(v.begin() + static_cast<long>(pos),
                     v.begin() + static_cast<long>(pos + K - 1));
      pos += static_cast<std::size_t>(K) - 1;
      p.beta.resize(static_cast<std::size_t>(K) - 1);
      for (std::size_t l = 1; l < static_cast<std::size_t>(K) - 1; ++l) {
        p.beta[l] = v[pos++];
      }
      p.sigma.assign(v.begin() + static_cast<long>(pos),
                     v.begin() + static_cast<long>(pos + K - 1));
      pos += static_cast<std::size_t>(K) - 1;
      p.rho = v[pos];
      p.beta[0] = beta1_from_constraint(p.sigma[0], p.rho);
      return horizon2_matrix(p, Integration::gauss_hermite(nodes), true);
    };
    ctx.n_agg = &counts.n2;
    ctx.n_t = &counts.n2_t;
  }
  return ctx;
}

// Central-difference gradients of log p_kl for every cell, stacked as a
// K*K x d matrix (cell index k + K*l).
Eigen::MatrixXd log_prob_gradients(const ScoreContext& ctx) {
  const std::size_t d = ctx.at.size();
  const Eigen::MatrixXd p0 = ctx.probs(ctx.at);
  const long K = p0.rows();
  Eigen::MatrixXd grads = Eigen::MatrixXd::Zero(K * K, static_cast<long>(d));
  std::vector<double> v = ctx.at;
  for (std::size_t j = 0; j < d; ++j) {
    const double h = kFdStep * std::max(1.0, std::fabs(ctx.at[j]));
    v[j] = ctx.at[j] + h;
    const Eigen::MatrixXd pp = ctx.probs(v);
    v[j] = ctx.at[j] - h;
    const Eigen::MatrixXd pm = ctx.probs(v);
    v[j] = ctx.at[j];
    for (long l = 0; l < K; ++l) {
      for (long k = 0; k < K; ++k) {
        const double hi = pp(k, l);
        const double lo = pm(k, l);
        if (hi > 0.0 && lo > 0.0) {
          grads(k + K * l, static_cast<long>(j)) =
              (std::log(hi) - std::log(lo)) / (2.0 * h);
        }
      }
    }
  }
  return grads;
}

}  // namespace

double default_bandwidth(int t_len) {
  return 4.0 * std::pow(t_len / 100.0, 2.0 / 9.0);
}

double qs_kernel(double x) {
  const double z = 6.0 * std::numbers::pi * x / 5.0;
  if (std::fabs(z) < 1e-2) {
    // series expansion; the closed form cancels catastrophically near 0
    const double z2 = z * z;
    return 1.0 - z2 / 10.0 + z2 * z2 / 280.0;
  }
  return 25.0 / (12.0 * std::numbers::pi * std::numbers::pi * x * x) *
         (std::sin(z) / z - std::cos(z));
}

Eigen::MatrixXd estimate_j(const TransitionCounts& counts,
                           const EstimationResult& est, const HacConfig& cfg) {
  const ScoreContext ctx = make_context(counts, est, cfg);
  const Eigen::MatrixXd grads = log_prob_gradients(ctx);
  const long d = grads.cols();
  const long K = counts.k_states;
  const double total = ctx.n_agg->sum();
  Eigen::MatrixXd j_hat = Eigen::MatrixXd::Zero(d, d);
  for (long l = 0; l < K; ++l) {
    for (long k = 0; k < K; ++k) {
      const double n = (*ctx.n_agg)(k, l);
      if (n == 0.0) continue;
      const auto g = grads.row(k + K * l);
      j_hat.noalias() += (n / total) * g.transpose() * g;
    }
  }
  return j_hat;
}

CovarianceEstimate hac_covariance(const TransitionCounts& counts,
                                  const EstimationResult& est,
                                  const HacConfig& cfg) {
  if (counts.t_len < 5) {
    throw std::invalid_argument("hac_covariance: panel too short (T < 5)");
  }
  const ScoreContext ctx = make_context(counts, est, cfg);
  const Eigen::MatrixXd grads = log_prob_gradients(ctx);
  const long d = grads.cols();
  const long K = counts.k_states;
  const double n_firms = counts.n_firms;
  const long n_dates = static_cast<long>(ctx.n_t->size());

  // Per-date weighted scores demeaned by the full-sample cell averages.
  Eigen::MatrixXd shares(K * K, n_dates);
  for (long t = 0; t < n_dates; ++t) {
    const Eigen::MatrixXd& m = (*ctx.n_t)[static_cast<std::size_t>(t)];
    shares.col(t) = Eigen::Map<const Eigen::VectorXd>(m.data(), K * K) / n_firms;
  }
  const Eigen::VectorXd mean = shares.rowwise().mean();
  Eigen::MatrixXd scores(d, n_dates);
  for (long t = 0; t < n_dates; ++t) {
    scores.col(t) = grads.transpose() * (shares.col(t) - mean);
  }

  auto lag_cov = [&](long h) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (long t = 0; t + h < n_dates; ++t) {
      acc.noalias() += scores.col(t) * scores.col(t + h).transpose();
    }
    return (acc / static_cast<double>(n_dates)).eval();
  };

  CovarianceEstimate out;
  out.j_hat = estimate_j(counts, est, cfg);
  Eigen::MatrixXd j_inv;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.j_hat);
  if (lu.isInvertible()) {
    j_inv = lu.inverse();
  } else {
    out.pseudo_inverse = true;
    j_inv = out.j_hat.completeOrthogonalDecomposition().pseudoInverse();
  }

  const double bt = cfg.bandwidth > 0.0 ? cfg.bandwidth : default_bandwidth(counts.t_len);
  long max_lag = n_dates - 1;
  if (cfg.max_lag >= 0) max_lag = std::min<long>(max_lag, cfg.max_lag);

  const Eigen::MatrixXd i0 = lag_cov(0);
  std::vector<Eigen::MatrixXd> i_lags;
  for (long h = 1; h <= max_lag; ++h) i_lags.push_back(lag_cov(h));

  // Assemble at decreasing lag counts until the diagonal is nonnegative.
  for (long used = max_lag; used >= 0; --used) {
    Eigen::MatrixXd lrv = i0;
    for (long h = 1; h <= used; ++h) {
      const Eigen::MatrixXd& ih = i_lags[static_cast<std::size_t>(h) - 1];
      lrv += qs_kernel(h / bt) * (ih + ih.transpose());
    }
    Eigen::MatrixXd sigma = j_inv * lrv * j_inv;
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    if (sigma.diagonal().minCoeff() >= 0.0 || used == 0) {
      out.sigma = sigma;
      out.lags_used = static_cast<int>(used);
      out.truncated = used < max_lag;
      break;
    }
  }

  out.se.resize(static_cast<std::size_t>(d));
  for (long j = 0; j < d; ++j) {
    const double var = std::max(out.sigma(j, j), 0.0);
    out.se[static_cast<std::size_t>(j)] = std::sqrt(var / counts.t_len);
  }
  return out;
}

std::vector<double> t_statistics(const EstimationResult& est,
                                 const CovarianceEstimate& cov,
                                 const std::vector<double>& null_values) {
  const std::vector<double> theta =
      est.reduced ? stat_coords(*est.reduced) : stat_coords(*est.full);
  if (theta.size() != null_values.size() || theta.size() != cov.se.size()) {
    throw std::invalid_argument("t_statistics: dimension mismatch");
  }
  std::vector<double> t(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    t[j] = cov.se[j] > 0.0
               ? (theta[j] - null_values[j]) / cov.se[j]
               : std::numeric_limits<double>::quiet_NaN();
  }
  return t;
}

}  // namespace cm

#include "cm/counts.hpp"

#include <ostream>
#include <stdexcept>

namespace cm {

TransitionCounts build_counts(const RatingPanel& panel, TwoStepMode mode) {
  const int K = panel.k_states;
  const int T = panel.t_len;
  if (T < 2) throw std::invalid_argument("build_counts: need T >= 2");
  TransitionCounts counts;
  counts.n_firms = panel.n_firms;
  counts.t_len = T;
  counts.k_states = K;
  counts.two_step_mode = mode;

  counts.nl_t.assign(static_cast<std::size_t>(T), Eigen::VectorXd::Zero(K));
  counts.n1_t.assign(static_cast<std::size_t>(T) - 1, Eigen::MatrixXd::Zero(K, K));
  counts.n1 = Eigen::MatrixXd::Zero(K, K);

  for (int i = 0; i < panel.n_firms; ++i) {
    for (int t = 0; t < T; ++t) {
      const int y = panel.rating(i, t);
      if (y < 1 || y > K) throw std::invalid_argument("build_counts: rating out of 1..K");
      counts.nl_t[static_cast<std::size_t>(t)](y - 1) += 1.0;
      if (t >= 1) {
        counts.n1_t[static_cast<std::size_t>(t) - 1](y - 1, panel.rating(i, t - 1) - 1) += 1.0;
      }
    }
  }
  for (const Eigen::MatrixXd& m : counts.n1_t) counts.n1 += m;

  if (T >= 3) {
    counts.n2_t.assign(static_cast<std::size_t>(T) - 2, Eigen::MatrixXd::Zero(K, K));
    if (mode == TwoStepMode::Direct) {
      for (int i = 0; i < panel.n_firms; ++i) {
        for (int t = 2; t < T; ++t) {
          counts.n2_t[static_cast<std::size_t>(t) - 2](panel.rating(i, t) - 1,
                                                       panel.rating(i, t - 2) - 1) += 1.0;
        }
      }
    } else {
      // n2_{kl,t} = sum_j phat_{kj,t} n_{jl,t-1}, phat from the one-step
      // counts at date t normalized by the origin occupancy at t-1.
      for (int t = 2; t < T; ++t) {
        const Eigen::MatrixXd& step_t = counts.n1_t[static_cast<std::size_t>(t) - 1];
        const Eigen::MatrixXd& step_prev = counts.n1_t[static_cast<std::size_t>(t) - 2];
        const Eigen::VectorXd& occ_prev = counts.nl_t[static_cast<std::size_t>(t) - 1];
        Eigen::MatrixXd phat = Eigen::MatrixXd::Zero(K, K);
        for (int j = 0; j < K; ++j) {
          if (occ_prev(j) > 0.0) phat.col(j) = step_t.col(j) / occ_prev(j);
        }
        counts.n2_t[static_cast<std::size_t>(t) - 2] = phat * step_prev;
      }
    }
    counts.n2 = Eigen::MatrixXd::Zero(K, K);
    for (const Eigen::MatrixXd& m : counts.n2_t) counts.n2 += m;
  } else {
    counts.n2 = Eigen::MatrixXd::Zero(K, K);
  }
  return counts;
}

void write_counts_csv(const TransitionCounts& counts, std::ostream& os,
                      bool two_step) {
  os << "t,k,l,count\n";
  os.precision(17);
  const auto& per_date = two_step ? counts.n2_t : counts.n1_t;
  const int t0 = two_step ? 3 : 2;
  for (std::size_t idx = 0; idx < per_date.size(); ++idx) {
    for (int k = 0; k < counts.k_states; ++k) {
      for (int l = 0; l < counts.k_states; ++l) {
        const double v = per_date[idx](k, l);
        if (v != 0.0) {
          os << t0 + static_cast<int>(idx) << ',' << k + 1 << ',' << l + 1 << ','
             << v << '\n';
        }
      }
    }
  }
}

std::vector<double> estimate_rebirth_row(const TransitionCounts& counts,
                                         const std::vector<double>& fallback) {
  const int K = counts.k_states;
  const double total = counts.n1.col(K - 1).sum();
  if (total <= 0.0) return fallback;
  std::vector<double> row(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) row[static_cast<std::size_t>(k)] = counts.n1(k, K - 1) / total;
  return row;
}

}  // namespace cm

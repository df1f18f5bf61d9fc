#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "cm/panel.hpp"

namespace cm {

// Two-step transition counts come in two flavours: Direct tallies the
// indicator pairs 1(y_t = k, y_{t-2} = l); PaperSmoothed builds
// n2_{kl,t} = sum_j phat_{kj,t} n_{jl,t-1} from the one-step counts
// (phat_{kj,t} = n_{kj,t} / n_{j,t-1}, 0 when the denominator is 0).
enum class TwoStepMode { Direct, PaperSmoothed };

struct TransitionCounts {
  int n_firms = 0;
  int t_len = 0;
  int k_states = 0;
  TwoStepMode two_step_mode = TwoStepMode::Direct;
  std::vector<Eigen::MatrixXd> n1_t;  // dates t = 2..T, entry (k,l) dest k origin l
  Eigen::MatrixXd n1;                 // aggregated one-step counts
  std::vector<Eigen::MatrixXd> n2_t;  // dates t = 3..T
  Eigen::MatrixXd n2;                 // aggregated two-step counts
  std::vector<Eigen::VectorXd> nl_t;  // origin occupancy, dates t = 1..T

  bool has_two_step() const { return !n2_t.empty(); }
};

TransitionCounts build_counts(const RatingPanel& panel,
                              TwoStepMode mode = TwoStepMode::Direct);

// Audit export, rows "t,k,l,count" (t is the destination date).
void write_counts_csv(const TransitionCounts& counts, std::ostream& os,
                      bool two_step = false);

// Multinomial estimate of the rebirth assignment row from origin-K
// transitions; falls back to `fallback` when defaults never occur.
std::vector<double> estimate_rebirth_row(const TransitionCounts& counts,
                                         const std::vector<double>& fallback);

}  // namespace cm

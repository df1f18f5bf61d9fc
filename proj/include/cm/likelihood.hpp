#pragma once

#include "cm/counts.hpp"
#include "cm/kernel.hpp"
#include "cm/params.hpp"

namespace cm {

// A composite log-likelihood value. When a cell has positive count but a
// transition probability that underflows, its log is clamped at log(1e-300)
// and `degenerate` is set; the total is floored at the sentinel below. This
// keeps the objective finite with a usable slope for line searches.
struct ObjectiveValue {
  double value = 0.0;
  bool degenerate = false;
};

constexpr double kLogZeroSentinel = -1e300;

// CL(1): sum_{k,l} n_{kl} log p_{kl} with p from the reduced closed form;
// origin-K transitions use the rebirth probabilities.
ObjectiveValue cl1(const TransitionCounts& counts, const ReducedParamsCL1& r,
                   const std::vector<double>& rebirth);

// CL(2): sum_{k,l} n2_{kl} log p_{kl}(2) with the horizon-2 matrix from the
// adjusted transition kernel.
ObjectiveValue cl2(const TransitionCounts& counts, const ModelParams& theta,
                   const Integration& integ);

// CL(1,2) = CL(1) + CL(2) at the same structural parameters (the CL(1)
// scale is gamma_l = sqrt(sigma_l^2 + beta_l^2)).
ObjectiveValue cl12(const TransitionCounts& counts, const ModelParams& theta,
                    const Integration& integ);

// Log-likelihood conditional on a given factor path (evaluation only):
// sum_t sum_{k,l} n_{kl,t} log p_{kl}(f_t).
ObjectiveValue conditional_loglik(const TransitionCounts& counts,
                                  const ModelParams& theta,
                                  const FactorPath& f_path);

}  // namespace cm

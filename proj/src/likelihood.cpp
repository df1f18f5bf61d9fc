#include "cm/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace cm {

namespace {

// Count-weighted log of a probability matrix; zero-count cells contribute
// nothing regardless of p. Cells with mass but underflowed probability are
// clamped at log(1e-300) instead of collapsing the whole objective to a
// flat sentinel -- a cliff there destroys finite-difference line searches.
ObjectiveValue weighted_log(const Eigen::MatrixXd& counts,
                            const Eigen::MatrixXd& probs) {
  constexpr double kTiny = 1e-300;
  ObjectiveValue out;
  for (long l = 0; l < counts.cols(); ++l) {
    for (long k = 0; k < counts.rows(); ++k) {
      const double n = counts(k, l);
      if (n == 0.0) continue;
      const double p = probs(k, l);
      if (p < kTiny) {
        out.degenerate = true;
        out.value += n * std::log(kTiny);
      } else {
        out.value += n * std::log(p);
      }
    }
  }
  if (out.degenerate) out.value = std::max(out.value, kLogZeroSentinel);
  return out;
}

}  // namespace

ObjectiveValue cl1(const TransitionCounts& counts, const ReducedParamsCL1& r,
                   const std::vector<double>& rebirth) {
  if (counts.k_states != r.k_states) {
    throw std::invalid_argument("cl1: K mismatch");
  }
  return weighted_log(counts.n1, expected_matrix_reduced(r, rebirth));
}

ObjectiveValue cl2(const TransitionCounts& counts, const ModelParams& theta,
                   const Integration& integ) {
  if (!counts.has_two_step()) {
    throw std::invalid_argument("cl2: counts lack two-step transitions");
  }
  if (counts.k_states != theta.k_states) {
    throw std::invalid_argument("cl2: K mismatch");
  }
  return weighted_log(counts.n2, horizon2_matrix(theta, integ, true));
}

ObjectiveValue cl12(const TransitionCounts& counts, const ModelParams& theta,
                    const Integration& integ) {
  const ObjectiveValue a = cl1(counts, cl1_reduce(theta), theta.rebirth_row);
  const ObjectiveValue b = cl2(counts, theta, integ);
  return ObjectiveValue{a.value + b.value, a.degenerate || b.degenerate};
}

ObjectiveValue conditional_loglik(const TransitionCounts& counts,
                                  const ModelParams& theta,
                                  const FactorPath& f_path) {
  if (f_path.f.size() != static_cast<std::size_t>(counts.t_len)) {
    throw std::invalid_argument("conditional_loglik: factor path length mismatch");
  }
  ObjectiveValue out;
  for (std::size_t idx = 0; idx < counts.n1_t.size(); ++idx) {
    const double f = f_path.f[idx + 1];  // transitions into date t use f_t
    const ObjectiveValue term =
        weighted_log(counts.n1_t[idx], conditional_matrix(theta, f, true));
    out.value += term.value;
    out.degenerate = out.degenerate || term.degenerate;
  }
  return out;
}

}  // namespace cm

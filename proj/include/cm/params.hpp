#pragma once

#include <string>
#include <vector>

namespace cm {

// Which composite objective a parameter vector is meant for. CL1 works on
// the reduced (c, delta, gamma) parameterization; CL2 carries the full
// structural parameters under the normalization gamma_1 = 1 with
// gamma_1 = sqrt(sigma_1^2 + beta_1^2 (1 - rho^2)) and beta_1 > 0.
enum class ParamMode { CL1, CL2 };

// Structural parameters of the ordered-probit migration model with K rating
// categories; state K is default. Thresholds c holds c_2..c_K with the
// identification pin c_2 = 0 (c_1 = -inf, c_{K+1} = +inf are implicit).
// delta, beta, sigma have one entry per non-default origin state l = 1..K-1.
struct ModelParams {
  int k_states = 0;
  std::vector<double> c;
  std::vector<double> delta;
  std::vector<double> beta;
  std::vector<double> sigma;
  double rho = 0.0;
  std::vector<double> rebirth_row;  // length K, assignment of new entries

  // c_k with k in 1..K+1, including the infinite end thresholds.
  double threshold(int k) const;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  // sqrt(sigma_l^2 + beta_l^2), the CL(1) unconditional scale.
  double gamma1_cl1(int l) const;
  // sqrt(sigma_l^2 + beta_l^2 (1 - rho^2)), the CL(2) scale.
  double gamma_cl2(int l) const;

  std::string to_json() const;
  static ModelParams from_json(const std::string& text);
};

// Parameters identifiable from CL(1): thresholds c_3..c_K (c_2 = 0),
// intercepts delta_1..delta_{K-1}, and scales gamma_2..gamma_{K-1}
// (gamma_1 = 1 pinned).
struct ReducedParamsCL1 {
  int k_states = 0;
  std::vector<double> c;      // c_3..c_K, size K-2
  std::vector<double> delta;  // size K-1
  std::vector<double> gamma;  // gamma_2..gamma_{K-1}, size K-2

  double threshold(int k) const;    // k in 1..K+1
  double gamma_at(int l) const;     // l in 1..K-1, gamma_1 == 1
  void validate() const;
};

ReducedParamsCL1 cl1_reduce(const ModelParams& p);

// Positive root of sigma_1^2 + beta_1^2 (1 - rho^2) = 1.
double beta1_from_constraint(double sigma1, double rho);

// Flat optimizer coordinates. CL1 layout: log threshold increments (K-2),
// delta (K-1), log gamma (K-2). CL2 layout: log threshold increments (K-2),
// delta (K-1), beta_2..beta_{K-1} (K-2), logit sigma_1 then log sigma_2..
// (K-1), atanh rho (1); beta_1 is derived from (sigma_1, rho).
std::vector<double> to_unconstrained(const ReducedParamsCL1& r);
std::vector<double> to_unconstrained(const ModelParams& p);

ReducedParamsCL1 reduced_from_unconstrained(const std::vector<double>& v,
                                            int k_states);
ModelParams params_from_unconstrained(const std::vector<double>& v,
                                      int k_states,
                                      const std::vector<double>& rebirth_row);

int unconstrained_dim(ParamMode mode, int k_states);

}  // namespace cm

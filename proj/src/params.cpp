#include "cm/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace cm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

// log(sigmoid) pair used for the sigma_1 in (0,1) coordinate.
double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double ModelParams::threshold(int k) const {
  if (k <= 1) return -kInf;
  if (k >= k_states + 1) return kInf;
  return c[static_cast<std::size_t>(k) - 2];
}

double ModelParams::gamma1_cl1(int l) const {
  const double b = beta[static_cast<std::size_t>(l) - 1];
  const double s = sigma[static_cast<std::size_t>(l) - 1];
  return std::sqrt(b * b + s * s);
}

double ModelParams::gamma_cl2(int l) const {
  const double b = beta[static_cast<std::size_t>(l) - 1];
  const double s = sigma[static_cast<std::size_t>(l) - 1];
  return std::sqrt(s * s + b * b * (1.0 - rho * rho));
}

void ModelParams::validate() const {
  if (k_states < 3) throw std::invalid_argument("ModelParams: k_states < 3");
  const std::size_t K = static_cast<std::size_t>(k_states);
  if (c.size() != K - 1 || delta.size() != K - 1 || beta.size() != K - 1 ||
      sigma.size() != K - 1 || rebirth_row.size() != K) {
    throw std::invalid_argument("ModelParams: bad field sizes");
  }
  check_finite(c, "c");
  check_finite(delta, "delta");
  check_finite(beta, "beta");
  check_finite(sigma, "sigma");
  if (c[0] != 0.0) throw std::invalid_argument("ModelParams: c_2 != 0");
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (!(c[i] > c[i - 1])) {
      throw std::invalid_argument("ModelParams: thresholds not increasing");
    }
  }
  for (double s : sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("ModelParams: sigma <= 0");
  }
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("ModelParams: |rho| >= 1");
  }
  if (!(beta[0] > 0.0) && beta[0] != 0.0) {
    throw std::invalid_argument("ModelParams: beta_1 < 0");
  }
  double sum = 0.0;
  for (double r : rebirth_row) {
    if (r < 0.0) throw std::invalid_argument("ModelParams: rebirth_row < 0");
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument("ModelParams: rebirth_row does not sum to 1");
  }
}

double ReducedParamsCL1::threshold(int k) const {
  if (k <= 1) return -kInf;
  if (k >= k_states + 1) return kInf;
  if (k == 2) return 0.0;
  return c[static_cast<std::size_t>(k) - 3];
}

double ReducedParamsCL1::gamma_at(int l) const {
  if (l == 1) return 1.0;
  return gamma[static_cast<std::size_t>(l) - 2];
}

void ReducedParamsCL1::validate() const {
  if (k_states < 3) throw std::invalid_argument("ReducedParamsCL1: k_states < 3");
  const std::size_t K = static_cast<std::size_t>(k_states);
  if (c.size() != K - 2 || delta.size() != K - 1 || gamma.size() != K - 2) {
    throw std::invalid_argument("ReducedParamsCL1: bad field sizes");
  }
  check_finite(c, "c");
  check_finite(delta, "delta");
  check_finite(gamma, "gamma");
  double prev = 0.0;
  for (double ck : c) {
    if (!(ck > prev)) {
      throw std::invalid_argument("ReducedParamsCL1: thresholds not increasing");
    }
    prev = ck;
  }
  for (double g : gamma) {
    if (!(g > 0.0)) throw std::invalid_argument("ReducedParamsCL1: gamma <= 0");
  }
}

ReducedParamsCL1 cl1_reduce(const ModelParams& p) {
  p.validate();
  ReducedParamsCL1 r;
  r.k_states = p.k_states;
  // Normalize by gamma_1 so the pin gamma_1 = 1 holds; the transition
  // probabilities Phi((c_k - delta_l) / gamma_l) are invariant to this
  // common rescaling.
  const double g1 = p.gamma1_cl1(1);
  r.c.resize(p.c.size() - 1);
  for (std::size_t i = 1; i < p.c.size(); ++i) r.c[i - 1] = p.c[i] / g1;
  r.delta.resize(p.delta.size());
  for (std::size_t i = 0; i < p.delta.size(); ++i)
    r.delta[i] = p.delta[i] / g1;
  r.gamma.resize(p.c.size() - 1);
  for (int l = 2; l <= p.k_states - 1; ++l) {
    r.gamma[static_cast<std::size_t>(l) - 2] = p.gamma1_cl1(l) / g1;
  }
  return r;
}

double beta1_from_constraint(double sigma1, double rho) {
  if (!(sigma1 > 0.0 && sigma1 < 1.0)) {
    throw std::invalid_argument(
        "beta1_from_constraint: sigma_1 must lie in (0,1)");
  }
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("beta1_from_constraint: |rho| >= 1");
  }
  return std::sqrt((1.0 - sigma1 * sigma1) / (1.0 - rho * rho));
}

int unconstrained_dim(ParamMode mode, int k_states) {
  const int K = k_states;
  return mode == ParamMode::CL1 ? 3 * K - 5 : 4 * K - 5;
}

std::vector<double> to_unconstrained(const ReducedParamsCL1& r) {
  r.validate();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(unconstrained_dim(ParamMode::CL1, r.k_states)));
  double prev = 0.0;
  for (double ck : r.c) {
    v.push_back(std::log(ck - prev));
    prev = ck;
  }
  for (double d : r.delta) v.push_back(d);
  for (double g : r.gamma) v.push_back(std::log(g));
  return v;
}

std::vector<double> to_unconstrained(const ModelParams& p) {
  p.validate();
  if (std::fabs(p.gamma_cl2(1) - 1.0) > 1e-8) {
    throw std::invalid_argument(
        "to_unconstrained: CL2 normalization gamma_1 != 1");
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(unconstrained_dim(ParamMode::CL2, p.k_states)));
  double prev = 0.0;
  for (std::size_t i = 1; i < p.c.size(); ++i) {
    v.push_back(std::log(p.c[i] - prev));
    prev = p.c[i];
  }
  for (double d : p.delta) v.push_back(d);
  for (std::size_t l = 1; l < p.beta.size(); ++l) v.push_back(p.beta[l]);
  v.push_back(logit(p.sigma[0]));
  for (std::size_t l = 1; l < p.sigma.size(); ++l) {
    v.push_back(std::log(p.sigma[l]));
  }
  v.push_back(std::atanh(p.rho));
  return v;
}

ReducedParamsCL1 reduced_from_unconstrained(const std::vector<double>& v,
                                            int k_states) {
  const std::size_t K = static_cast<std::size_t>(k_states);
  if (v.size() != static_cast<std::size_t>(unconstrained_dim(ParamMode::CL1, k_states))) {
    throw std::invalid_argument("reduced_from_unconstrained: bad dimension");
  }
  check_finite(v, "unconstrained vector");
  ReducedParamsCL1 r;
  r.k_states = k_states;
  std::size_t pos = 0;
  double c = 0.0;
  r.c.resize(K - 2);
  for (std::size_t i = 0; i < K - 2; ++i) {
    c += std::exp(v[pos++]);
    r.c[i] = c;
  }
  r.delta.assign(v.begin() + static_cast<long>(pos),
                 v.begin() + static_cast<long>(pos + K - 1));
  pos += K - 1;
  r.gamma.resize(K - 2);
  for (std::size_t i = 0; i < K - 2; ++i) r.gamma[i] = std::exp(v[pos++]);
  return r;
}

ModelParams params_from_unconstrained(const std::vector<double>& v,
                                      int k_states,
                                      const std::vector<double>& rebirth_row) {
  const std::size_t K = static_cast<std::size_t>(k_states);
  if (v.size() != static_cast<std::size_t>(unconstrained_dim(ParamMode::CL2, k_states))) {
    throw std::invalid_argument("params_from_unconstrained: bad dimension");
  }
  check_finite(v, "unconstrained vector");
  ModelParams p;
  p.k_states = k_states;
  p.rebirth_row = rebirth_row;
  std::size_t pos = 0;
  p.c.resize(K - 1);
  p.c[0] = 0.0;
  for (std::size_t i = 1; i < K - 1; ++i) {
    p.c[i] = p.c[i - 1] + std::exp(v[pos++]);
  }
  p.delta.assign(v.begin() + static_cast<long>(pos),
                 v.begin() + static_cast<long>(pos + K - 1));
  pos += K - 1;
  p.beta.resize(K - 1);
  for (std::size_t l = 1; l < K - 1; ++l) p.beta[l] = v[pos++];
  p.sigma.resize(K - 1);
  // Clamp away from the boundary so beta_1 stays finite when the optimizer
  // probes extreme coordinates (tanh/sigmoid round to +-1 in doubles).
  p.sigma[0] = std::clamp(sigmoid(v[pos++]), 1e-12, 1.0 - 1e-12);
  for (std::size_t l = 1; l < K - 1; ++l) p.sigma[l] = std::exp(v[pos++]);
  p.rho = std::clamp(std::tanh(v[pos++]), -(1.0 - 1e-12), 1.0 - 1e-12);
  p.beta[0] = beta1_from_constraint(p.sigma[0], p.rho);
  return p;
}

std::string ModelParams::to_json() const {
  nlohmann::json j;
  j["k_states"] = k_states;
  j["c"] = c;
  j["delta"] = delta;
  j["beta"] = beta;
  j["sigma"] = sigma;
  j["rho"] = rho;
  j["rebirth_row"] = rebirth_row;
  return j.dump(2);
}

ModelParams ModelParams::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelParams p;
  p.k_states = j.at("k_states").get<int>();
  p.c = j.at("c").get<std::vector<double>>();
  p.delta = j.at("delta").get<std::vector<double>>();
  p.beta = j.at("beta").get<std::vector<double>>();
  p.sigma = j.at("sigma").get<std::vector<double>>();
  p.rho = j.at("rho").get<double>();
  p.rebirth_row = j.at("rebirth_row").get<std::vector<double>>();
  p.validate();
  return p;
}

}  // namespace cm

#include "cm/designs.hpp"

#include <cmath>
#include <stdexcept>

namespace cm {

std::vector<double> default_thresholds(int k_states) {
  // c_2 = 0, then equal steps of 1.5 up to c_K.
  std::vector<double> c(static_cast<std::size_t>(k_states) - 1);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.5 * static_cast<double>(i);
  return c;
}

std::vector<double> default_intercepts(int k_states) {
  std::vector<double> d(static_cast<std::size_t>(k_states) - 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = -0.5 + 1.5 * static_cast<double>(i);
  }
  return d;
}

std::vector<double> default_rebirth_row(int k_states) {
  std::vector<double> row(static_cast<std::size_t>(k_states), 0.0);
  row[0] = 0.5;
  row[1] = 0.3;
  row[2] = 0.2;
  return row;
}

ModelParams design_params(const DesignConfig& cfg) {
  if (cfg.design < 1 || cfg.design > 3) {
    throw std::invalid_argument("design_params: unknown design id " +
                                std::to_string(cfg.design));
  }
  if (cfg.k_states < 2) throw std::invalid_argument("design_params: K < 2");

  ModelParams p;
  p.k_states = cfg.k_states;
  p.c = cfg.thresholds.empty() ? default_thresholds(cfg.k_states) : cfg.thresholds;
  p.delta = cfg.intercepts.empty() ? default_intercepts(cfg.k_states) : cfg.intercepts;
  p.rebirth_row =
      cfg.rebirth_row.empty() ? default_rebirth_row(cfg.k_states) : cfg.rebirth_row;
  p.rho = cfg.rho;

  const std::size_t n = static_cast<std::size_t>(cfg.k_states) - 1;
  p.beta.resize(n);
  p.sigma.resize(n);
  const double base2 = std::sqrt(2.0);
  const double base_rho = std::sqrt(2.0 - cfg.rho * cfg.rho);
  for (std::size_t l = 0; l < n; ++l) {
    const double growth = std::pow(1.0 + cfg.r, static_cast<double>(l));
    switch (cfg.design) {
      case 1:
        p.sigma[l] = p.beta[l] = growth / base2;
        break;
      case 2:
        p.sigma[l] = p.beta[l] = growth / base_rho;
        break;
      case 3:
        p.beta[l] = 1.0 / base_rho;
        p.sigma[l] = p.beta[l] * growth;
        break;
    }
  }
  p.validate();
  return p;
}

}  // namespace cm

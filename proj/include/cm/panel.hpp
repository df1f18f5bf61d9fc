#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cm/params.hpp"
#include "cm/rng.hpp"

namespace cm {

// Stationary AR(1) factor path with unit marginal variance.
struct FactorPath {
  std::vector<double> f;
  double rho = 0.0;
  Seed seed{0};
};

FactorPath simulate_factor(double rho, int t_len, Seed seed);

// Initial-rating schemes for simulated panels.
struct StationaryConditionalNoDefault {};
struct FixedRating {
  int rating = 1;
};
struct InitialDistribution {
  std::vector<double> probs;  // length K
};
using PanelInit =
    std::variant<StationaryConditionalNoDefault, FixedRating, InitialDistribution>;

// N firms observed over T dates; ratings in 1..K. Column t of `ratings`
// is date t+1. Defaulted firms are replaced next period by a rebirth draw,
// so the panel stays rectangular (the slot index is kept, firm identity is
// not tracked across rebirths).
struct RatingPanel {
  int n_firms = 0;
  int t_len = 0;
  int k_states = 0;
  std::vector<int> ratings;                 // n_firms * t_len, firm-major
  std::vector<double> scores;               // same layout, empty if not kept
  std::optional<FactorPath> factor;
  std::string design_name;
  Seed seed{0};

  int rating(int firm, int t) const {  // firm in 0..N-1, t in 0..T-1
    return ratings[static_cast<std::size_t>(firm) * static_cast<std::size_t>(t_len) +
                   static_cast<std::size_t>(t)];
  }
  double score(int firm, int t) const {
    return scores[static_cast<std::size_t>(firm) * static_cast<std::size_t>(t_len) +
                  static_cast<std::size_t>(t)];
  }
};

RatingPanel simulate_panel(const ModelParams& theta, int n_firms, int t_len,
                           const PanelInit& init, Seed seed,
                           bool keep_scores = false);

// Expected probability of keeping the previous rating, per date, for one
// firm slot: s_t = P[stay in y_{t-1} | f_t]. Requires a simulated panel
// (factor path present). Entry 0 is defined from the initial rating.
std::vector<double> stability_series(const RatingPanel& panel,
                                     const ModelParams& theta, int firm);

// CSV formats: panel "firm,t,rating[,score]", factor "t,f".
void write_panel_csv(const RatingPanel& panel, std::ostream& os);
RatingPanel read_panel_csv(std::istream& is, int k_states);
void write_factor_csv(const FactorPath& path, std::ostream& os);

}  // namespace cm

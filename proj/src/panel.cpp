#include "cm/panel.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cm/kernel.hpp"

namespace cm {

namespace {

// Substream labels under the panel base seed.
constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kFirmStream = 3;

int sample_categorical(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(probs.size());
}

int rating_from_score(const ModelParams& theta, double score) {
  int k = 1;
  while (k < theta.k_states && score >= theta.threshold(k + 1)) ++k;
  return k;
}

std::vector<double> initial_distribution(const ModelParams& theta,
                                         const PanelInit& init) {
  if (const auto* d = std::get_if<InitialDistribution>(&init)) {
    if (d->probs.size() != static_cast<std::size_t>(theta.k_states)) {
      throw std::invalid_argument("simulate_panel: bad initial distribution size");
    }
    return d->probs;
  }
  // Stationary distribution of the adjusted expected matrix, conditional
  // on starting in a non-default state.
  Eigen::VectorXd pi = stationary_distribution(expected_matrix(theta, true));
  std::vector<double> probs(static_cast<std::size_t>(theta.k_states));
  double sum = 0.0;
  for (int k = 0; k < theta.k_states - 1; ++k) sum += pi(k);
  for (int k = 0; k < theta.k_states - 1; ++k) probs[static_cast<std::size_t>(k)] = pi(k) / sum;
  probs[static_cast<std::size_t>(theta.k_states) - 1] = 0.0;
  return probs;
}

}  // namespace

FactorPath simulate_factor(double rho, int t_len, Seed seed) {
  if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("simulate_factor: |rho| >= 1");
  if (t_len < 1) throw std::invalid_argument("simulate_factor: t_len < 1");
  FactorPath path;
  path.rho = rho;
  path.seed = seed;
  path.f.resize(static_cast<std::size_t>(t_len));
  const Seed fs = derive(seed, kFactorStream);
  const double sd_innov = std::sqrt(1.0 - rho * rho);
  double f = normal_at(fs, 0);
  path.f[0] = f;
  for (int t = 1; t < t_len; ++t) {
    f = rho * f + sd_innov * normal_at(fs, static_cast<std::uint64_t>(t));
    path.f[static_cast<std::size_t>(t)] = f;
  }
  return path;
}

RatingPanel simulate_panel(const ModelParams& theta, int n_firms, int t_len,
                           const PanelInit& init, Seed seed, bool keep_scores) {
  theta.validate();
  if (n_firms < 1 || t_len < 1) {
    throw std::invalid_argument("simulate_panel: empty panel");
  }
  RatingPanel panel;
  panel.n_firms = n_firms;
  panel.t_len = t_len;
  panel.k_states = theta.k_states;
  panel.seed = seed;
  panel.factor = simulate_factor(theta.rho, t_len, seed);
  panel.ratings.resize(static_cast<std::size_t>(n_firms) * static_cast<std::size_t>(t_len));
  if (keep_scores) {
    panel.scores.assign(panel.ratings.size(),
                        std::numeric_limits<double>::quiet_NaN());
  }

  const std::vector<double> init_probs = initial_distribution(theta, init);
  const int fixed0 = std::holds_alternative<FixedRating>(init)
                         ? std::get<FixedRating>(init).rating
                         : 0;
  if (fixed0 != 0 && (fixed0 < 1 || fixed0 > theta.k_states)) {
    throw std::invalid_argument("simulate_panel: fixed initial rating out of range");
  }

  for (int i = 0; i < n_firms; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(t_len);
    int y = fixed0 != 0
                ? fixed0
                : sample_categorical(
                      init_probs,
                      uniform_at(derive(seed, kInitStream, static_cast<std::uint64_t>(i)), 0));
    panel.ratings[row] = y;
    for (int t = 1; t < t_len; ++t) {
      const Seed cell = derive(seed, kFirmStream, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(t));
      if (y == theta.k_states) {
        // Equal birth-death rebalancing: the defaulted slot is re-seeded.
        y = sample_categorical(theta.rebirth_row, uniform_at(cell, 1));
      } else {
        const std::size_t l = static_cast<std::size_t>(y) - 1;
        const double score = theta.delta[l] +
                             theta.beta[l] * panel.factor->f[static_cast<std::size_t>(t)] +
                             theta.sigma[l] * normal_at(cell, 0);
        y = rating_from_score(theta, score);
        if (keep_scores) panel.scores[row + static_cast<std::size_t>(t)] = score;
      }
      panel.ratings[row + static_cast<std::size_t>(t)] = y;
    }
  }
  return panel;
}

std::vector<double> stability_series(const RatingPanel& panel,
                                     const ModelParams& theta, int firm) {
  if (!panel.factor) {
    throw std::invalid_argument("stability_series: panel has no factor path");
  }
  if (firm < 0 || firm >= panel.n_firms) {
    throw std::out_of_range("stability_series: firm index out of range");
  }
  std::vector<double> s(static_cast<std::size_t>(panel.t_len));
  for (int t = 0; t < panel.t_len; ++t) {
    const int l = panel.rating(firm, t > 0 ? t - 1 : 0);
    const double f = panel.factor->f[static_cast<std::size_t>(t)];
    if (l == theta.k_states) {
      s[static_cast<std::size_t>(t)] =
          theta.rebirth_row[static_cast<std::size_t>(theta.k_states) - 1];
      continue;
    }
    const std::size_t li = static_cast<std::size_t>(l) - 1;
    const double loc = theta.delta[li] + theta.beta[li] * f;
    s[static_cast<std::size_t>(t)] =
        norm_cdf((theta.threshold(l + 1) - loc) / theta.sigma[li]) -
        norm_cdf((theta.threshold(l) - loc) / theta.sigma[li]);
  }
  return s;
}

void write_panel_csv(const RatingPanel& panel, std::ostream& os) {
  const bool with_scores = !panel.scores.empty();
  os << (with_scores ? "firm,t,rating,score\n" : "firm,t,rating\n");
  os.precision(17);
  for (int i = 0; i < panel.n_firms; ++i) {
    for (int t = 0; t < panel.t_len; ++t) {
      os << i + 1 << ',' << t + 1 << ',' << panel.rating(i, t);
      if (with_scores) os << ',' << panel.score(i, t);
      os << '\n';
    }
  }
}

RatingPanel read_panel_csv(std::istream& is, int k_states) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("panel csv: empty file");
  const bool with_scores = line.find("score") != std::string::npos;
  struct Row {
    int firm, t, rating;
    double score;
  };
  std::vector<Row> rows;
  int max_firm = 0, max_t = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Row r{};
    char comma;
    ss >> r.firm >> comma >> r.t >> comma >> r.rating;
    if (with_scores) {
      // parse via stod so that "nan" (rebirth cells) is accepted
      std::string field;
      ss >> comma;
      ss >> field;
      try {
        r.score = std::stod(field);
      } catch (const std::exception&) {
        ss.setstate(std::ios::failbit);
      }
    }
    if (!ss) throw std::runtime_error("panel csv: malformed row: " + line);
    if (r.rating < 1 || r.rating > k_states) {
      throw std::runtime_error("panel csv: rating out of 1..K: " + line);
    }
    max_firm = std::max(max_firm, r.firm);
    max_t = std::max(max_t, r.t);
    rows.push_back(r);
  }
  if (rows.size() != static_cast<std::size_t>(max_firm) * static_cast<std::size_t>(max_t)) {
    throw std::runtime_error("panel csv: not rectangular");
  }
  RatingPanel panel;
  panel.n_firms = max_firm;
  panel.t_len = max_t;
  panel.k_states = k_states;
  panel.ratings.resize(rows.size());
  if (with_scores) panel.scores.resize(rows.size());
  for (const Row& r : rows) {
    const std::size_t idx =
        static_cast<std::size_t>(r.firm - 1) * static_cast<std::size_t>(max_t) +
        static_cast<std::size_t>(r.t - 1);
    panel.ratings[idx] = r.rating;
    if (with_scores) panel.scores[idx] = r.score;
  }
  return panel;
}

void write_factor_csv(const FactorPath& path, std::ostream& os) {
  os << "t,f\n";
  os.precision(17);
  for (std::size_t t = 0; t < path.f.size(); ++t) {
    os << t + 1 << ',' << path.f[t] << '\n';
  }
}

}  // namespace cm

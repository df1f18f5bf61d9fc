#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cm/counts.hpp"
#include "cm/likelihood.hpp"
#include "cm/optimize.hpp"
#include "cm/params.hpp"

namespace cm {

enum class FitMode { CL1, CL2, CL12, TwoStep };

struct EstimationResult {
  FitMode mode = FitMode::CL1;
  int k_states = 0;
  std::optional<ReducedParamsCL1> reduced;   // CL1 fits
  std::optional<ModelParams> full;           // CL2/CL12/TwoStep fits
  std::vector<double> rebirth_row;           // nuisance, estimated from counts
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> unidentified_origins;     // empty origin states (1-based)

  std::string to_json() const;
};

// Moment-based CL(1) initializer: delta_l from the probit of the first
// cumulative frequency (c_2 = 0), thresholds from the origin-1 column,
// gamma started at 1.
ReducedParamsCL1 moment_init(const TransitionCounts& counts);

EstimationResult fit_cl1(const TransitionCounts& counts,
                         const OptimizerConfig& cfg);

struct MomentInit {};
struct WarmStart {
  ReducedParamsCL1 start;
};
using Cl2Init = std::variant<MomentInit, WarmStart>;

EstimationResult fit_cl2(const TransitionCounts& counts,
                         const OptimizerConfig& cfg,
                         const Cl2Init& init = MomentInit{});

EstimationResult fit_cl12(const TransitionCounts& counts,
                          const OptimizerConfig& cfg,
                          const Cl2Init& init = MomentInit{});

// CL(1) first, then CL(2) over the beta/sigma split angles (l >= 2) and rho
// with (c, delta, gamma) held at the step-1 values.
EstimationResult fit_two_step(const TransitionCounts& counts,
                              const OptimizerConfig& cfg);

// Statistical coordinate flattening used for inference (natural
// parameters, not optimizer coordinates).
// CL1: (c_3..c_K, delta_1..delta_{K-1}, gamma_2..gamma_{K-1})
// CL2: (c_3..c_K, delta, beta_2..beta_{K-1}, sigma_1..sigma_{K-1}, rho)
std::vector<double> stat_coords(const ReducedParamsCL1& r);
std::vector<double> stat_coords(const ModelParams& p);
std::vector<std::string> stat_coord_names(ParamMode mode, int k_states);

}  // namespace cm

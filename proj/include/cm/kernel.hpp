#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "cm/params.hpp"
#include "cm/rng.hpp"

namespace cm {

// All matrices in this module are column-stochastic: entry (k, l) is the
// probability of moving to destination state k+1 from origin state l+1
// (0-based indices). A matrix therefore acts on distribution vectors by
// left multiplication, and multi-period transitions compose as
// M_t * M_{t-1} * ... (latest factor first).

// Integration scheme for the factor expectation in horizon-2 matrices.
struct Integration {
  enum class Kind { GaussHermite, MonteCarlo };
  Kind kind = Kind::GaussHermite;
  int n_nodes = 40;       // GaussHermite
  long n_paths = 50000;   // MonteCarlo
  Seed seed{0x5eedULL};   // MonteCarlo

  static Integration gauss_hermite(int nodes) {
    return Integration{Kind::GaussHermite, nodes, 0, Seed{0}};
  }
  static Integration monte_carlo(long paths, Seed seed) {
    return Integration{Kind::MonteCarlo, 0, paths, seed};
  }
};

// One-step matrix conditional on factor value f. With adjusted = true the
// default origin column is the rebirth row; otherwise default is absorbing.
Eigen::MatrixXd conditional_matrix(const ModelParams& theta, double f,
                                   bool adjusted = true);

// Expected one-step matrix, closed form (factor integrated out).
Eigen::MatrixXd expected_matrix(const ModelParams& theta, bool adjusted);

// Expected one-step matrix in the reduced CL(1) parameterization; the
// default origin column is the supplied rebirth vector.
Eigen::MatrixXd expected_matrix_reduced(const ReducedParamsCL1& r,
                                        const std::vector<double>& rebirth);

// Expected horizon-2 matrix: one-dimensional factor integral of the product
// of the lag-smoothed and conditional one-step matrices.
Eigen::MatrixXd horizon2_matrix(const ModelParams& theta,
                                const Integration& integ, bool adjusted);

// Expected horizon-h matrix by Monte-Carlo over stationary AR(1) factor
// paths; h = 1 needs no simulation and returns the closed form.
Eigen::MatrixXd horizon_h_matrix(const ModelParams& theta, int h, long n_paths,
                                 Seed seed, bool adjusted);

// Left-invariant probability vector of a column-stochastic matrix.
// Throws std::runtime_error if the invariant distribution is not unique.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p_adjusted);

}  // namespace cm

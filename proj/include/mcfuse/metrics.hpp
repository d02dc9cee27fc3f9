#pragma once

#include "mcfuse/chain.hpp"
#include "mcfuse/penalized.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mcfuse {

// (1/m^2) sum over estimated classes of the largest overlap with a true class.
double purity(const EqualityPartition& truth, const EqualityPartition& estimate);

// sqrt(sum_ij (p*_ij - p_ij)^2).
double frobenius_distance(const TransitionMatrix& truth, const TransitionMatrix& estimate);

// Classes of exactly equal entries of a known truth matrix.
EqualityPartition truth_partition(const TransitionMatrix& truth);

// Fraction of cell pairs whose fused/unfused status in `estimate` agrees with
// exact equality in `truth`.
double selection_accuracy(const TransitionMatrix& truth, const EqualityPartition& estimate);
double selection_accuracy(const TransitionMatrix& truth, const PenalizedFit& fit);

struct CovarianceBlocks {
  int m = 0;
  // Z_i(j, k) = p_ij (delta_jk - p_ik): the multinomial covariance of row i.
  std::vector<Eigen::MatrixXd> blocks;
  StationaryDistribution pi{Eigen::VectorXd::Constant(2, 0.5)};
  // m^2 x m^2 block diagonal, block i = Z_i / pi_i, cells row-major.
  Eigen::MatrixXd assembled;
};

// Limiting covariance of sqrt(N) (P_hat - P) for a strictly positive chain.
CovarianceBlocks asymptotic_covariance(const TransitionMatrix& P);

// Plug-in variance of p_hat_a - p_hat_b for a sequence with N transitions.
double difference_variance(const CovarianceBlocks& cov, Cell a, Cell b, double N);

// (p_hat_ij - p*_ij) n_i. / (sqrt(N) p*_ij), with N the total transition count.
Eigen::MatrixXd scaled_residuals(const TransitionMatrix& estimate, const TransitionMatrix& truth,
                                 const TransitionCounts& counts);

}  // namespace mcfuse

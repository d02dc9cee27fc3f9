#pragma once

#include "mcfuse/chain.hpp"

namespace mcfuse {

// Lower bound on probabilities inside the optimizers; keeps log finite.
inline constexpr double kProbabilityFloor = 1e-9;

enum class ZeroRowPolicy {
  error,    // an unvisited state raises ZeroRowError
  uniform,  // an unvisited state gets the uniform row 1/m
};

// sum_ij n_ij log p_ij; cells with n_ij = 0 contribute nothing.
double log_likelihood(const TransitionMatrix& P, const TransitionCounts& counts);

// Closed-form count-ratio estimator n_ij / n_i.
TransitionMatrix mle(const TransitionCounts& counts,
                     ZeroRowPolicy zero_rows = ZeroRowPolicy::error);

// Shrinks count ratios toward the ergodic reference Q:
// (alpha q_ij + n_ij) / (alpha + n_i.).
TransitionMatrix bootstrap_mle(const TransitionCounts& counts, const TransitionMatrix& Q,
                               double alpha);

// Maximum likelihood under the constraint that all cells of a class share one
// value. Probabilities are bounded below by kProbabilityFloor.
TransitionMatrix constrained_mle(const TransitionCounts& counts,
                                 const EqualityPartition& partition);

struct LrtResult {
  double gamma = 0.0;     // -2 log likelihood ratio
  int df = 0;             // m^2 - number of null classes
  double critical = 0.0;  // chi-square quantile at 1 - level
  double level = 0.05;
  double p_value = 1.0;
  bool reject = false;
  TransitionMatrix null_fit;
  TransitionMatrix alt_fit;
};

// Tests the equality structure `null_partition` against the unrestricted chain.
LrtResult lrt(const TransitionCounts& counts, const EqualityPartition& null_partition,
              double level);

}  // namespace mcfuse

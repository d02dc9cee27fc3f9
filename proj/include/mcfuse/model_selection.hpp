#pragma once

#include "mcfuse/chain.hpp"
#include "mcfuse/penalized.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mcfuse {

inline constexpr int kDefaultFolds = 5;
// Held-out probabilities are floored here before taking logs.
inline constexpr double kHeldOutFloor = 1e-9;

// k contiguous blocks in sequence order; the first N mod k blocks get one
// extra state.
std::vector<StateSequence> split_folds(const StateSequence& seq, int k);

// Transition counts of each block plus the pooled counts of the others.
struct FoldCounts {
  std::vector<TransitionCounts> test;
  std::vector<TransitionCounts> train;
};

FoldCounts fold_counts(const StateSequence& seq, int k);

// sum_ij -n_ij log max(p_ij, kHeldOutFloor).
double held_out_nll(const TransitionMatrix& P, const TransitionCounts& test);

struct CvOptions {
  int k = kDefaultFolds;
  Method method = Method::mcalasso;
  double gamma = 1.0;
  SolverOptions solver{};
  int threads = 1;
};

// Per-fold held-out scores at one lambda; the CV score is their sum.
Eigen::VectorXd cv_fold_scores(const FoldCounts& folds, double lambda, const CvOptions& opts);

double cv_score(const StateSequence& seq, double lambda, int k, Method method, double gamma,
                const SolverOptions& solver = {});

struct CvReport {
  std::vector<double> grid;
  std::vector<double> scores;
  double best_lambda = 0.0;
  std::size_t best_index = 0;
  int k = kDefaultFolds;
  Method method = Method::mcalasso;
  double gamma = 1.0;
  Eigen::MatrixXd per_fold;  // k x |grid|
};

CvReport select_lambda(const StateSequence& seq, const std::vector<double>& grid,
                       const CvOptions& opts = {});
CvReport select_lambda(const FoldCounts& folds, const std::vector<double>& grid,
                       const CvOptions& opts = {});

// `count` values from lo to hi, evenly spaced in log scale.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace mcfuse

#pragma once

#include "mcfuse/chain.hpp"
#include "mcfuse/estimators.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace mcfuse {

// All unordered pairs of distinct cells, m^2 (m^2 - 1) / 2 of them. Cells are
// indexed row-major; pairs are listed in lexicographic order (a, b), a < b.
class PairSet {
 public:
  int states() const { return m_; }
  std::size_t size() const { return pairs_.size(); }
  const std::pair<int, int>& operator[](std::size_t t) const { return pairs_[t]; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  Cell first(std::size_t t) const { return cell_at(pairs_[t].first, m_); }
  Cell second(std::size_t t) const { return cell_at(pairs_[t].second, m_); }

 private:
  friend PairSet pair_set(int m);
  int m_ = 0;
  std::vector<std::pair<int, int>> pairs_;
};

PairSet pair_set(int m);

// p_a - p_b for every pair t = (a, b), in PairSet order.
Eigen::VectorXd pair_differences(const TransitionMatrix& P, const PairSet& pairs);

inline constexpr double kDefaultWeightCap = 1e8;

enum class Method { mclasso, mcalasso };

std::string_view method_name(Method method);

struct PairWeights {
  Eigen::VectorXd weights;
  double gamma = 1.0;
  double w_max = kDefaultWeightCap;
  bool adaptive = false;
};

// All weights 1 (the plain lasso penalty).
PairWeights unit_weights(const PairSet& pairs);

// w_t = min(1 / |pilot difference|^gamma, w_max).
PairWeights adaptive_weights(const TransitionMatrix& pilot, const PairSet& pairs, double gamma,
                             double w_max = kDefaultWeightCap);

// sum_ij -n_ij log p_ij + lambda sum_t w_t |p_a - p_b|.
double objective(const TransitionMatrix& P, const TransitionCounts& counts, double lambda,
                 const PairWeights& weights, const PairSet& pairs);

struct SolverOptions {
  double fuse_tol = 1e-4;     // |p_a - p_b| at or below this counts as fused
  double tol_obj = 1e-9;      // relative Newton-decrement target
  double tol_kkt = 1e-6;      // certified when the relative KKT residual is below this
  double mu_start = 1e-2;     // smoothing schedule for |x| ~ sqrt(x^2 + mu^2)
  double mu_end = 1e-8;
  double mu_factor = 10.0;
  double floor = kProbabilityFloor;
  int max_newton = 100;       // per continuation stage
  ZeroRowPolicy zero_rows = ZeroRowPolicy::error;
};

struct SolverDiagnostics {
  int iterations = 0;
  double constraint_violation = 0.0;
  double final_mu = 0.0;
  double kkt_residual = 0.0;
  bool certified = false;
  // Threshold of the fusion pattern that was polished; 0 when the smoothed
  // solution was kept as is.
  double polish_threshold = 0.0;
};

struct PenalizedFit {
  TransitionMatrix estimate;
  double lambda = 0.0;
  PairWeights weights;
  double objective_value = 0.0;
  std::vector<std::size_t> active_set;  // pair indices t whose cells are not fused
  EqualityPartition fused_partition;
  SolverDiagnostics diagnostics;
};

// Minimizes the penalized negative log-likelihood over row-stochastic
// matrices with entries in [floor, 1]. Smoothing continuation locates the
// solution, the detected fusion pattern is then solved exactly and the result
// is certified by a subgradient KKT check.
PenalizedFit solve(const TransitionCounts& counts, double lambda, const PairWeights& weights,
                   const SolverOptions& opts = {});

// Builds the weights for `method` (adaptive ones from the MLE pilot with the
// uniform zero-row policy) and solves.
PenalizedFit fit_penalized(const TransitionCounts& counts, double lambda, Method method,
                           double gamma = 1.0, const SolverOptions& opts = {});

// Post-fusion refit: constrained MLE under the fit's fused partition.
TransitionMatrix refit(const TransitionCounts& counts, const PenalizedFit& fit);

}  // namespace mcfuse

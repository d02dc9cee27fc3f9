#include "mcfuse/model_selection.hpp"

#include "mcfuse/detail/parallel.hpp"
#include "mcfuse/error.hpp"

#include <cmath>
#include <string>

namespace mcfuse {

std::vector<StateSequence> split_folds(const StateSequence& seq, int k) {
  if (k < 2) throw DomainError("cross-validation needs at least 2 folds");
  const std::size_t n = seq.size();
  if (n < 2 * static_cast<std::size_t>(k)) {
    throw TooShortError("sequence of length " + std::to_string(n) + " is too short for " +
                        std::to_string(k) + " folds");
  }
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::vector<StateSequence> blocks;
  blocks.reserve(static_cast<std::size_t>(k));
  std::size_t begin = 0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(k); ++b) {
    const std::size_t end = begin + base + (b < extra ? 1 : 0);
    blocks.push_back(seq.slice(begin, end));
    begin = end;
  }
  return blocks;
}

FoldCounts fold_counts(const StateSequence& seq, int k) {
  FoldCounts out;
  TransitionCounts total = TransitionCounts::zeros(seq.states());
  for (const StateSequence& block : split_folds(seq, k)) {
    out.test.push_back(count_transitions(block));
    total = total + out.test.back();
  }
  for (const TransitionCounts& test : out.test) out.train.push_back(total - test);
  return out;
}

double held_out_nll(const TransitionMatrix& P, const TransitionCounts& test) {
  if (P.states() != test.states()) throw ShapeError("matrix and counts differ in size");
  double nll = 0.0;
  for (int i = 0; i < P.states(); ++i) {
    for (int j = 0; j < P.states(); ++j) {
      if (test(i, j) == 0) continue;
      nll -= static_cast<double>(test(i, j)) * std::log(std::max(P(i, j), kHeldOutFloor));
    }
  }
  return nll;
}

Eigen::VectorXd cv_fold_scores(const FoldCounts& folds, double lambda, const CvOptions& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be a finite nonnegative number");
  }
  SolverOptions solver = opts.solver;
  // Training blocks may miss a state entirely.
  solver.zero_rows = ZeroRowPolicy::uniform;
  const std::size_t k = folds.test.size();
  Eigen::VectorXd scores(static_cast<Eigen::Index>(k));
  for (std::size_t f = 0; f < k; ++f) {
    const PenalizedFit fit = fit_penalized(folds.train[f], lambda, opts.method, opts.gamma, solver);
    scores[static_cast<Eigen::Index>(f)] = held_out_nll(fit.estimate, folds.test[f]);
  }
  return scores;
}

double cv_score(const StateSequence& seq, double lambda, int k, Method method, double gamma,
                const SolverOptions& solver) {
  const CvOptions opts{.k = k, .method = method, .gamma = gamma, .solver = solver};
  return cv_fold_scores(fold_counts(seq, k), lambda, opts).sum();
}

CvReport select_lambda(const FoldCounts& folds, const std::vector<double>& grid,
                       const CvOptions& opts) {
  if (grid.empty()) throw DomainError("lambda grid is empty");
  for (double lambda : grid) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw DomainError("lambda grid values must be finite and nonnegative");
    }
  }
  const int k = static_cast<int>(folds.test.size());
  CvReport report{
      .grid = grid,
      .scores = std::vector<double>(grid.size()),
      .k = k,
      .method = opts.method,
      .gamma = opts.gamma,
      .per_fold = Eigen::MatrixXd(k, static_cast<Eigen::Index>(grid.size())),
  };
  detail::parallel_for(grid.size(), opts.threads, [&](std::size_t g) {
    report.per_fold.col(static_cast<Eigen::Index>(g)) = cv_fold_scores(folds, grid[g], opts);
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    report.scores[g] = report.per_fold.col(static_cast<Eigen::Index>(g)).sum();
    if (!std::isfinite(report.scores[g])) {
      throw ConvergenceError("cross-validation score is not finite at lambda " +
                             std::to_string(grid[g]));
    }
    const double best = report.scores[report.best_index];
    const bool better = report.scores[g] < best ||
                        (report.scores[g] == best && grid[g] < grid[report.best_index]);
    if (better) report.best_index = g;
  }
  report.best_lambda = grid[report.best_index];
  return report;
}

CvReport select_lambda(const StateSequence& seq, const std::vector<double>& grid,
                       const CvOptions& opts) {
  return select_lambda(fold_counts(seq, opts.k), grid, opts);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw DomainError("log grid needs 0 < lo <= hi and at least one point");
  }
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int g = 0; g < count; ++g) grid[static_cast<std::size_t>(g)] = lo * std::exp(step * g);
  grid.back() = hi;
  return grid;
}

}  // namespace mcfuse

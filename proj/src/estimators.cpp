#include "mcfuse/estimators.hpp"

#include "mcfuse/chi_square.hpp"
#include "mcfuse/detail/class_solver.hpp"
#include "mcfuse/error.hpp"

#include <cmath>
#include <string>

namespace mcfuse {

namespace {

void require_same_states(const TransitionMatrix& P, const TransitionCounts& counts) {
  if (P.states() != counts.states()) {
    throw ShapeError("matrix has " + std::to_string(P.states()) + " states but counts have " +
                     std::to_string(counts.states()));
  }
}

// Interior starting guess: counts with a half pseudo-count per cell.
Eigen::MatrixXd smoothed_ratios(const TransitionCounts& counts) {
  const int m = counts.states();
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      P(i, j) = (static_cast<double>(counts(i, j)) + 0.5) /
                (static_cast<double>(counts.row_sum(i)) + 0.5 * m);
    }
  }
  return P;
}

}  // namespace

double log_likelihood(const TransitionMatrix& P, const TransitionCounts& counts) {
  require_same_states(P, counts);
  double ll = 0.0;
  for (int i = 0; i < P.states(); ++i) {
    for (int j = 0; j < P.states(); ++j) {
      const auto n = counts(i, j);
      if (n == 0) continue;
      if (P(i, j) <= 0.0) {
        throw DomainError("cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                          ") has observed transitions but zero probability");
      }
      ll += static_cast<double>(n) * std::log(P(i, j));
    }
  }
  return ll;
}

TransitionMatrix mle(const TransitionCounts& counts, ZeroRowPolicy zero_rows) {
  const int m = counts.states();
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    const auto total = counts.row_sum(i);
    if (total == 0) {
      if (zero_rows == ZeroRowPolicy::error) {
        throw ZeroRowError("state " + std::to_string(i + 1) + " is never left");
      }
      P.row(i).setConstant(1.0 / m);
      continue;
    }
    for (int j = 0; j < m; ++j) {
      P(i, j) = static_cast<double>(counts(i, j)) / static_cast<double>(total);
    }
  }
  return validate_matrix(P, Validity::stochastic);
}

TransitionMatrix bootstrap_mle(const TransitionCounts& counts, const TransitionMatrix& Q,
                               double alpha) {
  require_same_states(Q, counts);
  if (!(alpha >= 0.0)) throw DomainError("smoothing strength must be nonnegative");
  if (Q.mode() != Validity::strict_ergodic) {
    throw PositivityError("reference matrix must be strict-ergodic");
  }
  if (alpha == 0.0) return mle(counts, ZeroRowPolicy::error);

  const int m = counts.states();
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    const double denom = alpha + static_cast<double>(counts.row_sum(i));
    for (int j = 0; j < m; ++j) {
      P(i, j) = (alpha * Q(i, j) + static_cast<double>(counts(i, j))) / denom;
    }
  }
  return validate_matrix(P, Validity::strict_ergodic);
}

TransitionMatrix constrained_mle(const TransitionCounts& counts,
                                 const EqualityPartition& partition) {
  if (partition.states() != counts.states()) {
    throw MismatchError("partition and counts have different state counts");
  }
  const detail::ClassProblem problem(counts, partition, {}, kProbabilityFloor);
  const Eigen::VectorXd start = problem.feasible_point(smoothed_ratios(counts));
  const detail::ContinuationOutcome fit = detail::continuation(problem, start, {});

  const double residual = problem.kkt_residual(fit.v, 0.0, detail::kBoundTolerance);
  if (residual > 1e-6) {
    throw ConvergenceError("constrained MLE did not converge (KKT residual " +
                           std::to_string(residual) + ")");
  }
  if (problem.row_violation(fit.v) >= kRowSumTolerance) {
    throw ConvergenceError("constrained MLE violates the row sums");
  }
  return validate_matrix(problem.expand(fit.v), Validity::strict_ergodic);
}

LrtResult lrt(const TransitionCounts& counts, const EqualityPartition& null_partition,
              double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0, 1)");
  const int m = counts.states();
  const int df = m * m - static_cast<int>(null_partition.size());
  if (df <= 0) {
    throw DegenerateError("null hypothesis imposes no equality (df = 0)");
  }

  TransitionMatrix alt = mle(counts, ZeroRowPolicy::uniform);
  TransitionMatrix null_fit = constrained_mle(counts, null_partition);
  const double gamma = -2.0 * (log_likelihood(null_fit, counts) - log_likelihood(alt, counts));
  const double critical = chi_square_quantile(1.0 - level, df);
  return LrtResult{
      .gamma = gamma,
      .df = df,
      .critical = critical,
      .level = level,
      .p_value = chi_square_sf(std::max(gamma, 0.0), df),
      .reject = gamma > critical,
      .null_fit = std::move(null_fit),
      .alt_fit = std::move(alt),
  };
}

}  // namespace mcfuse

#include "mcfuse/penalized.hpp"

#include "mcfuse/detail/class_solver.hpp"
#include "mcfuse/error.hpp"

#include <cmath>
#include <string>

namespace mcfuse {

namespace {

// Smoothing used while polishing a fixed fusion pattern; between-class
// differences there are far larger, so this is |x| to machine precision.
constexpr double kPolishSmoothing = 1e-12;

void require_pairs(const PairSet& pairs, int m) {
  if (pairs.states() != m) {
    throw MismatchError("pair set is for " + std::to_string(pairs.states()) +
                        " states, matrix has " + std::to_string(m));
  }
}

std::vector<detail::CellPairTerm> penalty_terms(const PairSet& pairs, double lambda,
                                                const PairWeights& weights) {
  std::vector<detail::CellPairTerm> terms;
  if (lambda == 0.0) return terms;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const double w = lambda * weights.weights[static_cast<Eigen::Index>(t)];
    if (w != 0.0) terms.push_back({pairs[t].first, pairs[t].second, w});
  }
  return terms;
}

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

struct Candidate {
  Eigen::VectorXd v;  // one value per cell, row-major
  double objective = 0.0;
  double kkt = 0.0;
  double threshold = 0.0;
  int iterations = 0;
};

}  // namespace

PairSet pair_set(int m) {
  if (m < 2) throw ShapeError("pair set needs at least 2 states");
  PairSet out;
  out.m_ = m;
  const int cells = m * m;
  out.pairs_.reserve(static_cast<std::size_t>(cells) * (cells - 1) / 2);
  for (int a = 0; a < cells; ++a) {
    for (int b = a + 1; b < cells; ++b) out.pairs_.emplace_back(a, b);
  }
  return out;
}

Eigen::VectorXd pair_differences(const TransitionMatrix& P, const PairSet& pairs) {
  const int m = P.states();
  require_pairs(pairs, m);
  Eigen::VectorXd d(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    d[static_cast<Eigen::Index>(t)] = P(pairs.first(t)) - P(pairs.second(t));
  }
  return d;
}

std::string_view method_name(Method method) {
  return method == Method::mclasso ? "mclasso" : "mcalasso";
}

PairWeights unit_weights(const PairSet& pairs) {
  return PairWeights{
      .weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pairs.size())),
      .gamma = 1.0,
      .w_max = 1.0,
      .adaptive = false,
  };
}

PairWeights adaptive_weights(const TransitionMatrix& pilot, const PairSet& pairs, double gamma,
                             double w_max) {
  if (!(gamma > 0.0)) throw DomainError("adaptive weight exponent must be positive");
  if (!(w_max > 0.0)) throw DomainError("weight cap must be positive");
  const Eigen::VectorXd d = pair_differences(pilot, pairs);
  Eigen::VectorXd w(d.size());
  for (Eigen::Index t = 0; t < d.size(); ++t) {
    const double gap = std::abs(d[t]);
    w[t] = gap == 0.0 ? w_max : std::min(std::pow(gap, -gamma), w_max);
  }
  return PairWeights{.weights = std::move(w), .gamma = gamma, .w_max = w_max, .adaptive = true};
}

double objective(const TransitionMatrix& P, const TransitionCounts& counts, double lambda,
                 const PairWeights& weights, const PairSet& pairs) {
  const int m = P.states();
  require_pairs(pairs, m);
  if (counts.states() != m) throw ShapeError("matrix and counts differ in size");
  if (static_cast<std::size_t>(weights.weights.size()) != pairs.size()) {
    throw MismatchError("weight vector does not match the pair set");
  }
  if (P.entries().minCoeff() <= 0.0) {
    throw DomainError("penalized objective needs strictly positive probabilities");
  }
  double nll = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (counts(i, j) > 0) nll -= static_cast<double>(counts(i, j)) * std::log(P(i, j));
    }
  }
  const Eigen::VectorXd d = pair_differences(P, pairs);
  return nll + lambda * weights.weights.dot(d.cwiseAbs());
}

PenalizedFit solve(const TransitionCounts& counts, double lambda, const PairWeights& weights,
                   const SolverOptions& opts) {
  const int m = counts.states();
  const PairSet pairs = pair_set(m);
  if (static_cast<std::size_t>(weights.weights.size()) != pairs.size()) {
    throw MismatchError("weight vector has " + std::to_string(weights.weights.size()) +
                        " entries, pair set has " + std::to_string(pairs.size()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be a finite nonnegative number");
  }
  if (opts.zero_rows == ZeroRowPolicy::error) {
    for (int i = 0; i < m; ++i) {
      if (counts.row_sum(i) == 0) {
        throw ZeroRowError("state " + std::to_string(i + 1) + " is never left");
      }
    }
  }

  const std::vector<detail::CellPairTerm> terms = penalty_terms(pairs, lambda, weights);
  const EqualityPartition singletons = EqualityPartition::singletons(m);
  const detail::ClassProblem full(counts, singletons, terms, opts.floor);
  const detail::Continuation schedule{
      .mu_start = opts.mu_start,
      .mu_end = opts.mu_end,
      .mu_factor = opts.mu_factor,
  };
  const detail::NewtonSettings newton{.max_iterations = opts.max_newton, .tol = 1e-3 * opts.tol_obj};
  const double final_tau = schedule.barrier_ratio * opts.mu_end;

  const detail::ContinuationOutcome smooth =
      detail::continuation(full, full.feasible_point(smoothed_ratios(counts)), schedule, newton);

  auto evaluate = [&](Eigen::VectorXd v, double tie_tol, double threshold, int iterations) {
    Candidate c;
    c.objective = full.exact_value(v);
    c.kkt = full.kkt_residual(v, tie_tol, detail::kBoundTolerance);
    c.threshold = threshold;
    c.iterations = iterations;
    c.v = std::move(v);
    return c;
  };

  std::vector<Candidate> candidates;
  int iterations = smooth.iterations;
  if (!terms.empty()) {
    // Solve the fusion pattern seen at successively finer thresholds exactly;
    // the first pattern that passes the KKT check wins.
    std::vector<EqualityPartition> tried;
    for (double threshold = opts.fuse_tol; threshold >= 1e-2 * opts.fuse_tol;
         threshold /= 10.0) {
      Eigen::MatrixXd cells = full.expand(smooth.v);
      EqualityPartition pattern = extract_equality_classes(cells, threshold);
      if (pattern.size() == singletons.size()) continue;
      bool seen = false;
      for (const auto& p : tried) seen = seen || p == pattern;
      if (seen) continue;
      tried.push_back(pattern);

      int polish_iterations = 0;
      for (int round = 0; round < 4; ++round) {
        const detail::ClassProblem reduced(counts, pattern, terms, opts.floor);
        const detail::NewtonOutcome polished = detail::minimize(
            reduced, reduced.feasible_point(cells), kPolishSmoothing, final_tau, newton);
        polish_iterations += polished.iterations;
        cells = reduced.expand(polished.v);
        EqualityPartition next = extract_equality_classes(cells, threshold);
        if (next == pattern) break;
        pattern = std::move(next);
      }
      iterations += polish_iterations;
      candidates.push_back(evaluate(full.restrict(cells), 0.0, threshold, polish_iterations));
      if (candidates.back().kkt <= opts.tol_kkt) break;
    }
  }
  if (candidates.empty() || candidates.back().kkt > opts.tol_kkt) {
    candidates.push_back(evaluate(smooth.v, 1e3 * opts.mu_end, 0.0, 0));
  }

  const Candidate* best = nullptr;
  for (const Candidate& c : candidates) {
    if (c.kkt <= opts.tol_kkt) {
      best = &c;
      break;
    }
  }
  if (best == nullptr) {
    best = &candidates.front();
    for (const Candidate& c : candidates) {
      if (c.objective < best->objective) best = &c;
    }
    throw ConvergenceError("penalized solver did not certify optimality at lambda " +
                           std::to_string(lambda) + " (KKT residual " +
                           std::to_string(best->kkt) + ")");
  }

  TransitionMatrix estimate = validate_matrix(full.expand(best->v), Validity::strict_ergodic);
  EqualityPartition fused = extract_equality_classes(estimate, opts.fuse_tol);
  std::vector<std::size_t> active;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    if (!fused.same_class(pairs.first(t), pairs.second(t))) active.push_back(t);
  }
  const double violation = (estimate.entries().rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double value = objective(estimate, counts, lambda, weights, pairs);

  return PenalizedFit{
      .estimate = std::move(estimate),
      .lambda = lambda,
      .weights = weights,
      .objective_value = value,
      .active_set = std::move(active),
      .fused_partition = std::move(fused),
      .diagnostics =
          SolverDiagnostics{
              .iterations = iterations,
              .constraint_violation = violation,
              .final_mu = opts.mu_end,
              .kkt_residual = best->kkt,
              .certified = true,
              .polish_threshold = best->threshold,
          },
  };
}

PenalizedFit fit_penalized(const TransitionCounts& counts, double lambda, Method method,
                           double gamma, const SolverOptions& opts) {
  const PairSet pairs = pair_set(counts.states());
  const PairWeights weights =
      method == Method::mclasso
          ? unit_weights(pairs)
          : adaptive_weights(mle(counts, ZeroRowPolicy::uniform), pairs, gamma);
  return solve(counts, lambda, weights, opts);
}

TransitionMatrix refit(const TransitionCounts& counts, const PenalizedFit& fit) {
  return constrained_mle(counts, fit.fused_partition);
}

}  // namespace mcfuse

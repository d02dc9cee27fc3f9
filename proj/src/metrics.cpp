#include "mcfuse/metrics.hpp"

#include "mcfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcfuse {

namespace {

void require_same_shape(const TransitionMatrix& a, const TransitionMatrix& b) {
  if (a.states() != b.states()) {
    throw ShapeError("matrices have " + std::to_string(a.states()) + " and " +
                     std::to_string(b.states()) + " states");
  }
}

}  // namespace

double purity(const EqualityPartition& truth, const EqualityPartition& estimate) {
  if (truth.states() != estimate.states()) {
    throw MismatchError("partitions cover different cell sets");
  }
  const int m = truth.states();
  double total = 0.0;
  for (const auto& est : estimate.classes()) {
    std::vector<int> overlap(truth.size(), 0);
    for (const Cell& c : est) ++overlap[static_cast<std::size_t>(truth.class_of(c))];
    total += *std::max_element(overlap.begin(), overlap.end());
  }
  return total / (m * m);
}

double frobenius_distance(const TransitionMatrix& truth, const TransitionMatrix& estimate) {
  require_same_shape(truth, estimate);
  return (truth.entries() - estimate.entries()).norm();
}

EqualityPartition truth_partition(const TransitionMatrix& truth) {
  return extract_equality_classes(truth, 0.0);
}

double selection_accuracy(const TransitionMatrix& truth, const EqualityPartition& estimate) {
  if (truth.states() != estimate.states()) {
    throw ShapeError("truth and partition differ in size");
  }
  const PairSet pairs = pair_set(truth.states());
  std::size_t agree = 0;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const Cell a = pairs.first(t);
    const Cell b = pairs.second(t);
    agree += (truth(a) == truth(b)) == estimate.same_class(a, b);
  }
  return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

double selection_accuracy(const TransitionMatrix& truth, const PenalizedFit& fit) {
  return selection_accuracy(truth, fit.fused_partition);
}

CovarianceBlocks asymptotic_covariance(const TransitionMatrix& P) {
  if (P.entries().minCoeff() <= 0.0) {
    throw PositivityError("asymptotic covariance needs a strictly positive matrix");
  }
  const int m = P.states();
  CovarianceBlocks out;
  out.m = m;
  out.pi = stationary_distribution(P);
  out.assembled = Eigen::MatrixXd::Zero(m * m, m * m);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd p = P.entries().row(i).transpose();
    Eigen::MatrixXd Z = -p * p.transpose();
    Z.diagonal() += p;
    out.assembled.block(i * m, i * m, m, m) = Z / out.pi[i];
    out.blocks.push_back(std::move(Z));
  }
  return out;
}

double difference_variance(const CovarianceBlocks& cov, Cell a, Cell b, double N) {
  if (!(N > 0.0)) throw DomainError("sequence length must be positive");
  const int ia = cell_index(a, cov.m);
  const int ib = cell_index(b, cov.m);
  const Eigen::MatrixXd& S = cov.assembled;
  return (S(ia, ia) + S(ib, ib) - 2.0 * S(ia, ib)) / N;
}

Eigen::MatrixXd scaled_residuals(const TransitionMatrix& estimate, const TransitionMatrix& truth,
                                 const TransitionCounts& counts) {
  require_same_shape(estimate, truth);
  if (counts.states() != truth.states()) throw ShapeError("counts differ in size");
  const int m = truth.states();
  const double root_n = std::sqrt(static_cast<double>(counts.total()));
  Eigen::MatrixXd r(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      r(i, j) = (estimate(i, j) - truth(i, j)) * static_cast<double>(counts.row_sum(i)) /
                (root_n * truth(i, j));
    }
  }
  return r;
}

}  // namespace mcfuse

#include "mcfuse/error.hpp"
#include "mcfuse/metrics.hpp"
#include "mcfuse/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mcfuse;
using mcfuse::testing::matrix;
using mcfuse::testing::three_state_truth;

namespace {

TransitionMatrix random_positive_matrix(int m, Rng& rng) {
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) P(i, j) = 0.02 + rng.uniform();
    P.row(i) /= P.row(i).sum();
  }
  return validate_matrix(P, Validity::strict_ergodic);
}

EqualityPartition relabel(const EqualityPartition& p, const std::vector<int>& perm) {
  std::vector<std::vector<Cell>> classes;
  for (const auto& cls : p.classes()) {
    std::vector<Cell> mapped;
    for (const Cell& c : cls) mapped.push_back({perm[c.row], perm[c.col]});
    classes.push_back(mapped);
  }
  return EqualityPartition(p.states(), classes);
}

TransitionMatrix relabel(const TransitionMatrix& P, const std::vector<int>& perm) {
  Eigen::MatrixXd Q(P.states(), P.states());
  for (int i = 0; i < P.states(); ++i) {
    for (int j = 0; j < P.states(); ++j) Q(perm[i], perm[j]) = P(i, j);
  }
  return validate_matrix(Q, P.mode());
}

std::vector<int> labels_of(const EqualityPartition& p) {
  std::vector<int> labels(p.states() * p.states());
  for (int k = 0; k < static_cast<int>(labels.size()); ++k) {
    labels[k] = p.class_of(cell_at(k, p.states()));
  }
  return labels;
}

}  // namespace

TEST(Purity, Examples) {
  const EqualityPartition truth(2, {{{0, 0}, {1, 1}}, {{0, 1}}, {{1, 0}}});
  const EqualityPartition estimate(2, {{{0, 0}}, {{1, 1}}, {{0, 1}, {1, 0}}});
  EXPECT_DOUBLE_EQ(purity(truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(purity(truth, estimate), 0.75);
  EXPECT_DOUBLE_EQ(purity(truth, EqualityPartition::singletons(2)), 1.0);
  std::vector<Cell> all = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  EXPECT_DOUBLE_EQ(purity(truth, EqualityPartition(2, {all})), 0.5);
  EXPECT_THROW(purity(truth, EqualityPartition::singletons(3)), MismatchError);
}

TEST(Frobenius, Examples) {
  const TransitionMatrix A = matrix({{0.6, 0.4}, {0.4, 0.6}});
  const TransitionMatrix B = TransitionMatrix::uniform(2);
  EXPECT_EQ(frobenius_distance(A, A), 0.0);
  EXPECT_NEAR(frobenius_distance(A, B), 0.2, 1e-15);
  EXPECT_EQ(frobenius_distance(A, B), frobenius_distance(B, A));
  EXPECT_THROW(frobenius_distance(A, TransitionMatrix::uniform(3)), ShapeError);
}

TEST(Frobenius, TriangleInequality) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto A = random_positive_matrix(3, rng);
    const auto B = random_positive_matrix(3, rng);
    const auto C = random_positive_matrix(3, rng);
    EXPECT_LE(frobenius_distance(A, C),
              frobenius_distance(A, B) + frobenius_distance(B, C) + 1e-15);
  }
}

TEST(SelectionAccuracy, Examples) {
  const TransitionMatrix truth = three_state_truth();
  EXPECT_NEAR(selection_accuracy(truth, EqualityPartition::singletons(3)), 32.0 / 36, 1e-15);
  std::vector<Cell> all;
  for (int k = 0; k < 9; ++k) all.push_back(cell_at(k, 3));
  EXPECT_NEAR(selection_accuracy(truth, EqualityPartition(3, {all})), 4.0 / 36, 1e-15);
  EXPECT_EQ(selection_accuracy(truth, truth_partition(truth)), 1.0);
}

TEST(SelectionAccuracy, MatchesPairCountOracle) {
  const TransitionMatrix truth = three_state_truth();
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<Cell>> groups(4);
    for (int k = 0; k < 9; ++k) groups[rng.index(4)].push_back(cell_at(k, 3));
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    const EqualityPartition p(3, groups);
    EXPECT_NEAR(selection_accuracy(truth, p),
                mcfuse::testing::pair_agreement(truth.entries(), labels_of(p)), 1e-15);
  }
}

TEST(Metrics, InvariantUnderRelabeling) {
  const TransitionMatrix truth = three_state_truth();
  const std::vector<int> perm = {2, 0, 1};
  const EqualityPartition t = truth_partition(truth);
  const EqualityPartition estimate(3, {{{0, 0}, {0, 2}}, {{2, 0}}, {{0, 1}, {1, 2}, {2, 2}},
                                       {{1, 0}}, {{1, 1}}, {{2, 1}}});
  EXPECT_DOUBLE_EQ(purity(t, estimate), purity(relabel(t, perm), relabel(estimate, perm)));
  EXPECT_DOUBLE_EQ(selection_accuracy(truth, estimate),
                   selection_accuracy(relabel(truth, perm), relabel(estimate, perm)));
}

TEST(TruthPartition, ThreeStateTruth) {
  const EqualityPartition p = truth_partition(three_state_truth());
  EXPECT_EQ(p.size(), 6u);
  EXPECT_TRUE(p.same_class({0, 0}, {2, 0}));
  EXPECT_TRUE(p.same_class({0, 1}, {1, 2}));
}

TEST(Covariance, UniformTwoState) {
  const CovarianceBlocks cov = asymptotic_covariance(TransitionMatrix::uniform(2));
  EXPECT_NEAR(cov.pi[0], 0.5, 1e-12);
  for (const auto& Z : cov.blocks) {
    EXPECT_NEAR(Z(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(Z(0, 1), -0.25, 1e-15);
  }
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  expected.block(0, 0, 2, 2) << 0.5, -0.5, -0.5, 0.5;
  expected.block(2, 2, 2, 2) << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT((cov.assembled - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, BlocksHaveZeroRowSumsAndSigmaIsPsd) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.index(4));
    const TransitionMatrix P = random_positive_matrix(m, rng);
    const CovarianceBlocks cov = asymptotic_covariance(P);
    for (int i = 0; i < m; ++i) {
      EXPECT_LT(cov.blocks[i].rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
      for (int j = 0; j < m; ++j) EXPECT_NEAR(cov.blocks[i](j, j), P(i, j) * (1 - P(i, j)), 1e-15);
    }
    EXPECT_LT((cov.assembled - cov.assembled.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.assembled);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Covariance, DifferenceVarianceMatchesHandFormula) {
  const TransitionMatrix P = three_state_truth();
  const CovarianceBlocks cov = asymptotic_covariance(P);
  const StationaryDistribution pi = stationary_distribution(P);
  const double N = 10000;
  const double expected =
      (P(0, 1) * (1 - P(0, 1)) / pi[0] + P(2, 1) * (1 - P(2, 1)) / pi[2]) / N;
  EXPECT_NEAR(difference_variance(cov, {0, 1}, {2, 1}, N), expected, 1e-15);
  // Same row: covariance term -p_a p_b / pi_i enters.
  const double same_row =
      (P(0, 0) * (1 - P(0, 0)) + P(0, 1) * (1 - P(0, 1)) + 2 * P(0, 0) * P(0, 1)) / pi[0] / N;
  EXPECT_NEAR(difference_variance(cov, {0, 0}, {0, 1}, N), same_row, 1e-15);
  EXPECT_EQ(difference_variance(cov, {1, 1}, {1, 1}, N), 0.0);
}

TEST(Covariance, RejectsZeroEntries) {
  const TransitionMatrix P = matrix({{0.0, 1.0}, {0.5, 0.5}}, Validity::stochastic);
  EXPECT_THROW(asymptotic_covariance(P), PositivityError);
}

TEST(ScaledResiduals, StayBoundedAsLengthGrows) {
  const TransitionMatrix truth = three_state_truth();
  std::vector<double> sd;
  for (std::size_t N : {1000u, 10000u, 100000u}) {
    double sum = 0.0, sq = 0.0;
    int count = 0;
    for (int seed = 1; seed <= 50; ++seed) {
      const TransitionCounts n = count_transitions(simulate_sequence(truth, N, seed));
      const Eigen::MatrixXd r = scaled_residuals(mle(n), truth, n);
      for (Eigen::Index k = 0; k < r.size(); ++k) {
        sum += r.data()[k];
        sq += r.data()[k] * r.data()[k];
        ++count;
      }
    }
    const double mean = sum / count;
    sd.push_back(std::sqrt(sq / count - mean * mean));
  }
  EXPECT_LT(sd[2] / sd[0], 1.5);
  EXPECT_LT(sd[1] / sd[0], 1.5);
  EXPECT_GT(sd[2], 0.1);
}

#include "mcfuse/error.hpp"
#include "mcfuse/model_selection.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace mcfuse;
using mcfuse::testing::three_state_counts;
using mcfuse::testing::three_state_truth;

namespace {

StateSequence iota_sequence(std::size_t n, int m) {
  std::vector<int> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 1 + static_cast<int>(i % m);
  return StateSequence(s, m);
}

// Held-out NLL of fold-wise MLEs computed directly from the raw states.
double two_pass_mle_cv(const std::vector<int>& s, int m, int k) {
  const std::size_t n = s.size();
  std::vector<std::size_t> begin(k + 1, 0);
  for (int b = 0; b < k; ++b) {
    begin[b + 1] = begin[b] + n / k + (static_cast<std::size_t>(b) < n % k ? 1 : 0);
  }
  // Pass one: per-block counts.
  std::vector<std::vector<double>> block(k, std::vector<double>(m * m, 0.0));
  for (int b = 0; b < k; ++b) {
    for (std::size_t t = begin[b] + 1; t < begin[b + 1]; ++t) {
      block[b][(s[t - 1] - 1) * m + (s[t] - 1)] += 1.0;
    }
  }
  // Pass two: score each block under the MLE of the others.
  double total = 0.0;
  for (int b = 0; b < k; ++b) {
    std::vector<double> train(m * m, 0.0);
    for (int o = 0; o < k; ++o) {
      if (o == b) continue;
      for (int c = 0; c < m * m; ++c) train[c] += block[o][c];
    }
    for (int i = 0; i < m; ++i) {
      double row = 0.0;
      for (int j = 0; j < m; ++j) row += train[i * m + j];
      for (int j = 0; j < m; ++j) {
        const double p = row > 0 ? train[i * m + j] / row : 1.0 / m;
        total -= block[b][i * m + j] * std::log(std::max(p, 1e-9));
      }
    }
  }
  return total;
}

}  // namespace

TEST(SplitFolds, EvenSizes) {
  const StateSequence seq = iota_sequence(100, 3);
  const auto folds = split_folds(seq, 5);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 20u);
    EXPECT_EQ(count_transitions(f).total(), 19);
  }
}

TEST(SplitFolds, RemainderGoesToFirstBlocks) {
  const auto folds = split_folds(iota_sequence(11, 2), 5);
  std::vector<std::size_t> sizes;
  for (const auto& f : folds) sizes.push_back(f.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
}

TEST(SplitFolds, ConcatenationReproducesSequence) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 1237, 5);
  std::vector<int> joined;
  for (const auto& f : split_folds(seq, 7)) {
    joined.insert(joined.end(), f.values().begin(), f.values().end());
  }
  EXPECT_EQ(joined, seq.values());
}

TEST(SplitFolds, Errors) {
  const StateSequence seq = iota_sequence(9, 2);
  EXPECT_THROW(split_folds(seq, 5), TooShortError);
  EXPECT_THROW(split_folds(seq, 1), DomainError);
  EXPECT_NO_THROW(split_folds(iota_sequence(10, 2), 5));
}

TEST(FoldCounts, DroppedBoundaryTransitions) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 5003, 2);
  for (int k : {2, 5, 10}) {
    const FoldCounts fc = fold_counts(seq, k);
    std::int64_t total = 0;
    for (const auto& t : fc.test) total += t.total();
    EXPECT_EQ(total, static_cast<std::int64_t>(seq.size() - 1) - (k - 1));
    for (int b = 0; b < k; ++b) {
      EXPECT_EQ((fc.test[b] + fc.train[b]).matrix(), fc.test[0].matrix() + fc.train[0].matrix());
    }
  }
}

TEST(HeldOut, FloorsZeroProbabilities) {
  const TransitionMatrix P =
      validate_matrix(mcfuse::testing::rows({{1.0, 0.0}, {0.5, 0.5}}), Validity::stochastic);
  const double v = held_out_nll(P, mcfuse::testing::counts({{0, 2}, {1, 0}}));
  EXPECT_NEAR(v, -2 * std::log(kHeldOutFloor) - std::log(0.5), 1e-9);
}

TEST(CvScore, LambdaZeroMatchesTwoPassOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const StateSequence seq = simulate_sequence(three_state_truth(), 4000, seed);
    const double expected = two_pass_mle_cv(seq.values(), 3, 5);
    for (Method method : {Method::mclasso, Method::mcalasso}) {
      const double v = cv_score(seq, 0.0, 5, method, 1.0);
      EXPECT_NEAR(v, expected, 1e-6 * expected);
    }
  }
}

TEST(CvScore, UnvisitedTrainingStateUsesUniformRow) {
  // State 3 occurs only in the last block, so its training row is empty in
  // that block's complement and the fit falls back to the uniform row.
  std::vector<int> s;
  for (int r = 0; r < 40; ++r) s.push_back(1 + r % 2);
  for (int r = 0; r < 10; ++r) s.push_back(3);
  const StateSequence seq(s, 3);
  EXPECT_NEAR(cv_score(seq, 0.0, 5, Method::mcalasso, 1.0), two_pass_mle_cv(s, 3, 5), 1e-5);
}

TEST(CvScore, InvariantUnderStateRelabeling) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 3000, 11);
  const int perm[3] = {3, 1, 2};
  std::vector<int> relabeled;
  for (int x : seq.values()) relabeled.push_back(perm[x - 1]);
  const StateSequence other(relabeled, 3);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const double a = cv_score(seq, lambda, 5, Method::mcalasso, 1.0);
    const double b = cv_score(other, lambda, 5, Method::mcalasso, 1.0);
    EXPECT_NEAR(a, b, 1e-6 * a);
  }
}

TEST(SelectLambda, SingleCandidate) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 2000, 3);
  const CvReport r = select_lambda(seq, {0.0});
  EXPECT_EQ(r.best_lambda, 0.0);
  EXPECT_EQ(r.per_fold.rows(), 5);
  EXPECT_EQ(r.per_fold.cols(), 1);
  EXPECT_NEAR(r.per_fold.col(0).sum(), r.scores[0], 1e-9);
}

TEST(SelectLambda, DeterministicAndThreadInvariant) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 5000, 4);
  const std::vector<double> grid = log_grid(0.01, 100, 8);
  CvOptions one;
  CvOptions many;
  many.threads = 4;
  const CvReport a = select_lambda(seq, grid, one);
  const CvReport b = select_lambda(seq, grid, one);
  const CvReport c = select_lambda(seq, grid, many);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.scores, c.scores);
  EXPECT_EQ(a.best_lambda, c.best_lambda);
  EXPECT_EQ(a.per_fold, c.per_fold);
}

TEST(SelectLambda, DuplicatedGridKeepsArgmin) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 5000, 6);
  const std::vector<double> grid = log_grid(0.01, 100, 6);
  std::vector<double> doubled = grid;
  doubled.insert(doubled.end(), grid.begin(), grid.end());
  const CvReport a = select_lambda(seq, grid);
  const CvReport b = select_lambda(seq, doubled);
  EXPECT_EQ(a.best_lambda, b.best_lambda);
  EXPECT_LE(b.best_index, grid.size() - 1);
}

TEST(SelectLambda, BestIsMinimumWithSmallestTie) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 5000, 8);
  const CvReport r = select_lambda(seq, {0.0, 1e-12, 2e-12, 0.5});
  const double min = *std::min_element(r.scores.begin(), r.scores.end());
  EXPECT_EQ(r.scores[r.best_index], min);
  for (std::size_t g = 0; g < r.best_index; ++g) EXPECT_GT(r.scores[g], min);
}

TEST(SelectLambda, Errors) {
  const StateSequence seq = simulate_sequence(three_state_truth(), 200, 8);
  EXPECT_THROW(select_lambda(seq, {}), DomainError);
  EXPECT_THROW(select_lambda(seq, {-1.0}), DomainError);
  EXPECT_THROW(select_lambda(iota_sequence(5, 2), {0.0}), TooShortError);
}

TEST(LogGrid, Endpoints) {
  const auto g = log_grid(0.01, 100, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.01);
  EXPECT_DOUBLE_EQ(g[2], 1.0);
  EXPECT_DOUBLE_EQ(g.back(), 100.0);
}

TEST(SelectLambda, SimulationCountsRecoverReferenceFusion) {
  // Sequence realized from the three-state simulation counts; CV over the
  // default 30-point grid, then McALasso at the selected lambda.
  const StateSequence seq = realize_counts(three_state_counts(), 1);
  const CvReport r = select_lambda(seq, log_grid(0.01, 100, 30));
  EXPECT_GT(r.best_index, 0u);
  EXPECT_LT(r.best_index, r.grid.size() - 1);

  const PenalizedFit fit = fit_penalized(three_state_counts(), r.best_lambda, Method::mcalasso);
  const double reference[3][3] = {{0.4, 0.201, 0.4}, {0.504, 0.295, 0.201}, {0.4, 0.345, 0.255}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(fit.estimate(i, j), reference[i][j], 0.005);
  }
  const EqualityPartition& p = fit.fused_partition;
  EXPECT_TRUE(p.same_class({0, 0}, {0, 2}));
  EXPECT_TRUE(p.same_class({0, 0}, {2, 0}));
  EXPECT_TRUE(p.same_class({0, 1}, {1, 2}));
}

#include "mcfuse/chain.hpp"

#include "mcfuse/error.hpp"
#include "mcfuse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mcfuse {

namespace {

std::string row_label(int i) { return "row " + std::to_string(i + 1); }

double stationary_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  return (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

}  // namespace

TransitionMatrix TransitionMatrix::uniform(int m) {
  return validate_matrix(Eigen::MatrixXd::Constant(m, m, 1.0 / m),
                         Validity::strict_ergodic);
}

TransitionMatrix validate_matrix(const Eigen::MatrixXd& entries, Validity mode) {
  if (entries.rows() != entries.cols()) {
    throw ShapeError("transition matrix must be square, got " +
                     std::to_string(entries.rows()) + "x" +
                     std::to_string(entries.cols()));
  }
  const int m = static_cast<int>(entries.rows());
  if (m < 2) throw ShapeError("transition matrix needs at least 2 states");
  if (!entries.allFinite()) throw ShapeError("transition matrix has non-finite entries");

  Eigen::MatrixXd out = entries;
  for (int i = 0; i < m; ++i) {
    if (out.row(i).minCoeff() < 0.0) {
      throw PositivityError(row_label(i) + " has a negative entry");
    }
    const double sum = out.row(i).sum();
    if (std::abs(sum - 1.0) >= kRenormalizeTolerance) {
      throw RowSumError(row_label(i) + " sums to " + std::to_string(sum));
    }
    // Rows already summing to 1 up to round-off are left untouched so tied
    // entries stay bit-identical.
    if (std::abs(sum - 1.0) > 1e-13) out.row(i) /= sum;
    if (mode == Validity::strict_ergodic && out.row(i).minCoeff() <= 0.0) {
      throw PositivityError(row_label(i) +
                            " has a non-positive entry in strict-ergodic mode");
    }
  }
  return TransitionMatrix(std::move(out), mode);
}

StateSequence::StateSequence(std::vector<int> states, int m)
    : states_(std::move(states)), m_(m) {
  if (m_ < 2) throw ShapeError("state sequence needs at least 2 states");
  for (std::size_t s = 0; s < states_.size(); ++s) {
    if (states_[s] < 1 || states_[s] > m_) {
      throw ShapeError("state " + std::to_string(states_[s]) + " at position " +
                       std::to_string(s + 1) + " is outside [1, " +
                       std::to_string(m_) + "]");
    }
  }
}

StateSequence StateSequence::slice(std::size_t begin, std::size_t end) const {
  return StateSequence(std::vector<int>(states_.begin() + begin, states_.begin() + end),
                       m_);
}

TransitionCounts::TransitionCounts(CountMatrix counts) : counts_(std::move(counts)) {
  if (counts_.rows() != counts_.cols()) throw ShapeError("count matrix must be square");
  if (counts_.rows() < 2) throw ShapeError("count matrix needs at least 2 states");
  if (counts_.minCoeff() < 0) throw ShapeError("counts must be nonnegative");
  row_sums_.resize(counts_.rows());
  for (Eigen::Index i = 0; i < counts_.rows(); ++i) {
    row_sums_[i] = counts_.row(i).sum();
    total_ += row_sums_[i];
  }
}

TransitionCounts TransitionCounts::zeros(int m) {
  return TransitionCounts(CountMatrix::Zero(m, m));
}

TransitionCounts TransitionCounts::operator+(const TransitionCounts& other) const {
  if (other.states() != states()) throw ShapeError("count matrices differ in size");
  return TransitionCounts(counts_ + other.counts_);
}

TransitionCounts TransitionCounts::operator-(const TransitionCounts& other) const {
  if (other.states() != states()) throw ShapeError("count matrices differ in size");
  return TransitionCounts(counts_ - other.counts_);
}

EqualityPartition::EqualityPartition(int m, std::vector<std::vector<Cell>> classes,
                                     std::optional<std::vector<double>> values)
    : m_(m), class_of_(static_cast<std::size_t>(m) * m, -1) {
  if (m < 2) throw ShapeError("partition needs at least 2 states");
  if (values && values->size() != classes.size()) {
    throw MismatchError("partition has " + std::to_string(classes.size()) +
                        " classes but " + std::to_string(values->size()) + " values");
  }

  std::vector<std::size_t> order(classes.size());
  for (auto& cls : classes) {
    if (cls.empty()) throw MismatchError("partition contains an empty class");
    std::sort(cls.begin(), cls.end());
  }
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return classes[a].front() < classes[b].front(); });

  std::size_t covered = 0;
  for (std::size_t k : order) {
    const int id = static_cast<int>(classes_.size());
    for (const Cell& c : classes[k]) {
      if (c.row < 0 || c.row >= m || c.col < 0 || c.col >= m) {
        throw MismatchError("cell (" + std::to_string(c.row + 1) + "," +
                            std::to_string(c.col + 1) + ") is outside the " +
                            std::to_string(m) + "-state matrix");
      }
      int& slot = class_of_[cell_index(c, m)];
      if (slot != -1) {
        throw MismatchError("cell (" + std::to_string(c.row + 1) + "," +
                            std::to_string(c.col + 1) + ") appears in two classes");
      }
      slot = id;
      ++covered;
    }
    classes_.push_back(std::move(classes[k]));
  }
  if (covered != class_of_.size()) {
    throw MismatchError("partition covers " + std::to_string(covered) + " of " +
                        std::to_string(class_of_.size()) + " cells");
  }
  if (values) {
    std::vector<double> sorted(values->size());
    for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = (*values)[order[k]];
    values_ = std::move(sorted);
  }
}

EqualityPartition EqualityPartition::singletons(int m) {
  std::vector<std::vector<Cell>> classes;
  for (int k = 0; k < m * m; ++k) classes.push_back({cell_at(k, m)});
  return EqualityPartition(m, std::move(classes));
}

StationaryDistribution::StationaryDistribution(Eigen::VectorXd pi) : pi_(std::move(pi)) {
  if (pi_.size() < 2) throw ShapeError("stationary distribution needs at least 2 states");
  if (pi_.minCoeff() < 0.0 || std::abs(pi_.sum() - 1.0) > kRowSumTolerance) {
    throw DomainError("stationary distribution must be a probability vector");
  }
}

StateSequence simulate_sequence(const TransitionMatrix& P, std::size_t length,
                                std::uint64_t seed, InitialState initial) {
  const int m = P.states();
  if (length < 2) throw TooShortError("sequence length must be at least 2");

  Rng rng(seed);
  std::vector<int> states(length);
  switch (initial.law) {
    case InitialLaw::fixed:
      if (initial.state < 1 || initial.state > m) {
        throw ShapeError("initial state " + std::to_string(initial.state) +
                         " is outside [1, " + std::to_string(m) + "]");
      }
      states[0] = initial.state;
      break;
    case InitialLaw::stationary: {
      const Eigen::VectorXd pi = stationary_distribution(P).values();
      states[0] = static_cast<int>(rng.categorical({pi.data(), static_cast<std::size_t>(pi.size())})) + 1;
      break;
    }
    case InitialLaw::uniform:
      states[0] = static_cast<int>(rng.index(m)) + 1;
      break;
  }

  // Row-major copy so each row is a contiguous span of weights.
  std::vector<std::vector<double>> rows(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) rows[i][j] = P(i, j);
  }
  for (std::size_t s = 1; s < length; ++s) {
    states[s] = static_cast<int>(rng.categorical(rows[states[s - 1] - 1])) + 1;
  }
  return StateSequence(std::move(states), m);
}

TransitionCounts count_transitions(const StateSequence& seq) {
  if (seq.size() < 2) throw TooShortError("need at least 2 states to count transitions");
  CountMatrix counts = CountMatrix::Zero(seq.states(), seq.states());
  for (std::size_t s = 0; s + 1 < seq.size(); ++s) {
    ++counts(seq[s] - 1, seq[s + 1] - 1);
  }
  return TransitionCounts(std::move(counts));
}

StationaryDistribution stationary_distribution(const TransitionMatrix& P) {
  const int m = P.states();
  const Eigen::MatrixXd& E = P.entries();

  // pi (P - I) = 0 with one balance equation swapped for sum(pi) = 1.
  Eigen::MatrixXd A = E.transpose() - Eigen::MatrixXd::Identity(m, m);
  A.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b[m - 1] = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < m) {
    throw ConvergenceError("stationary distribution is not unique (reducible chain)");
  }
  Eigen::VectorXd pi = lu.solve(b);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();

  // Polish with power iterations if the direct solve left a residual.
  for (int it = 0; it < 10000 && stationary_residual(E, pi) >= 1e-12; ++it) {
    pi = E.transpose() * pi;
    pi /= pi.sum();
  }
  const double residual = stationary_residual(E, pi);
  if (residual >= 1e-12) {
    throw ConvergenceError("stationary distribution residual " + std::to_string(residual));
  }
  return StationaryDistribution(std::move(pi));
}

EqualityPartition extract_equality_classes(const Eigen::MatrixXd& entries, double tol) {
  if (tol < 0.0) throw DomainError("equality tolerance must be nonnegative");
  const int m = static_cast<int>(entries.rows());
  const int cells = m * m;

  // Linking every pair within tol and closing transitively gives the same
  // components as linking neighbours in sorted order.
  std::vector<int> order(cells);
  std::iota(order.begin(), order.end(), 0);
  auto value = [&](int k) { return entries(k / m, k % m); };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return value(a) < value(b); });

  std::vector<std::vector<Cell>> classes;
  std::vector<double> means;
  double sum = 0.0;
  for (int pos = 0; pos < cells; ++pos) {
    const int k = order[pos];
    if (pos == 0 || value(k) - value(order[pos - 1]) > tol) {
      if (!classes.empty()) means.push_back(sum / static_cast<double>(classes.back().size()));
      classes.emplace_back();
      sum = 0.0;
    }
    classes.back().push_back(cell_at(k, m));
    sum += value(k);
  }
  means.push_back(sum / static_cast<double>(classes.back().size()));
  return EqualityPartition(m, std::move(classes), std::move(means));
}

EqualityPartition extract_equality_classes(const TransitionMatrix& P, double tol) {
  return extract_equality_classes(P.entries(), tol);
}

StateSequence realize_counts(const TransitionCounts& counts, std::uint64_t seed) {
  const int m = counts.states();
  if (counts.total() < 1) throw TooShortError("counts contain no transitions");

  std::vector<std::int64_t> out(m), in(m, 0);
  for (int i = 0; i < m; ++i) {
    out[i] = counts.row_sum(i);
    for (int j = 0; j < m; ++j) in[j] += counts(i, j);
  }
  int start = -1, end = -1;
  for (int i = 0; i < m; ++i) {
    const std::int64_t excess = out[i] - in[i];
    if (excess == 0) continue;
    if (excess == 1 && start == -1) {
      start = i;
    } else if (excess == -1 && end == -1) {
      end = i;
    } else {
      throw DomainError("counts are not the transitions of a single sequence "
                        "(in/out degree imbalance at state " + std::to_string(i + 1) + ")");
    }
  }
  if ((start == -1) != (end == -1)) {
    throw DomainError("counts are not the transitions of a single sequence");
  }

  Rng rng(seed);
  if (start == -1) {
    std::vector<double> weights(out.begin(), out.end());
    start = end = static_cast<int>(rng.categorical(weights));
  }

  // Every state with outgoing transitions must be able to reach the end.
  std::vector<bool> reaches(m, false);
  reaches[end] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < m; ++i) {
      if (reaches[i]) continue;
      for (int j = 0; j < m; ++j) {
        if (counts(i, j) > 0 && reaches[j]) {
          reaches[i] = changed = true;
          break;
        }
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    if (out[i] > 0 && !reaches[i]) {
      throw DomainError("transition graph of the counts is disconnected");
    }
  }

  // Random last-exit arborescence rooted at `end` (loop-erased random walks).
  std::vector<std::vector<double>> rows(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) rows[i][j] = static_cast<double>(counts(i, j));
  }
  std::vector<bool> in_tree(m, false);
  std::vector<int> next(m, -1);
  in_tree[end] = true;
  for (int v = 0; v < m; ++v) {
    if (out[v] == 0) continue;
    for (int u = v; !in_tree[u]; u = next[u]) {
      next[u] = static_cast<int>(rng.categorical(rows[u]));
    }
    for (int u = v; !in_tree[u]; u = next[u]) in_tree[u] = true;
  }

  std::vector<std::vector<int>> exits(m);
  for (int v = 0; v < m; ++v) {
    for (int j = 0; j < m; ++j) exits[v].insert(exits[v].end(), counts(v, j), j);
    if (v != end && out[v] > 0) {
      exits[v].erase(std::find(exits[v].begin(), exits[v].end(), next[v]));
      rng.shuffle(exits[v]);
      exits[v].push_back(next[v]);
    } else {
      rng.shuffle(exits[v]);
    }
  }

  std::vector<int> states;
  states.reserve(static_cast<std::size_t>(counts.total()) + 1);
  std::vector<std::size_t> used(m, 0);
  states.push_back(start + 1);
  for (int u = start; used[u] < exits[u].size();) {
    const int w = exits[u][used[u]++];
    states.push_back(w + 1);
    u = w;
  }
  if (static_cast<std::int64_t>(states.size()) != counts.total() + 1) {
    throw DomainError("failed to realize counts as a single sequence");
  }
  return StateSequence(std::move(states), m);
}

}  // namespace mcfuse

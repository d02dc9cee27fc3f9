#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace mcfuse {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Tolerance on row sums for a constructed matrix.
inline constexpr double kRowSumTolerance = 1e-10;
// Largest row-sum deviation that validate_matrix silently renormalizes.
inline constexpr double kRenormalizeTolerance = 1e-8;

enum class Validity {
  strict_ergodic,  // every entry in (0, 1]
  stochastic,      // every entry in [0, 1]
};

// Zero-based (row, column) position in an m x m matrix.
struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

inline int cell_index(Cell c, int m) { return c.row * m + c.col; }
inline Cell cell_at(int index, int m) { return {index / m, index % m}; }

class TransitionMatrix {
 public:
  int states() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  double operator()(Cell c) const { return entries_(c.row, c.col); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  Validity mode() const { return mode_; }

  static TransitionMatrix uniform(int m);

 private:
  TransitionMatrix(Eigen::MatrixXd entries, Validity mode)
      : entries_(std::move(entries)), mode_(mode) {}

  friend TransitionMatrix validate_matrix(const Eigen::MatrixXd& entries,
                                          Validity mode);

  Eigen::MatrixXd entries_;
  Validity mode_;
};

// Observed chain realization; states are one-based, in [1, m].
class StateSequence {
 public:
  StateSequence(std::vector<int> states, int m);

  int states() const { return m_; }
  std::size_t size() const { return states_.size(); }
  int operator[](std::size_t s) const { return states_[s]; }
  const std::vector<int>& values() const { return states_; }

  StateSequence slice(std::size_t begin, std::size_t end) const;

 private:
  std::vector<int> states_;
  int m_;
};

class TransitionCounts {
 public:
  explicit TransitionCounts(CountMatrix counts);

  static TransitionCounts zeros(int m);

  int states() const { return static_cast<int>(counts_.rows()); }
  std::int64_t operator()(int i, int j) const { return counts_(i, j); }
  std::int64_t operator()(Cell c) const { return counts_(c.row, c.col); }
  std::int64_t row_sum(int i) const { return row_sums_[i]; }
  std::int64_t total() const { return total_; }
  const CountMatrix& matrix() const { return counts_; }

  TransitionCounts operator+(const TransitionCounts& other) const;
  TransitionCounts operator-(const TransitionCounts& other) const;

 private:
  CountMatrix counts_;
  std::vector<std::int64_t> row_sums_;
  std::int64_t total_ = 0;
};

// Partition of the m*m cells into classes sharing one probability value.
// Classes are stored canonically: cells sorted within a class, classes
// ordered by their first cell, so equal partitions compare equal.
class EqualityPartition {
 public:
  EqualityPartition(int m, std::vector<std::vector<Cell>> classes,
                    std::optional<std::vector<double>> values = std::nullopt);

  static EqualityPartition singletons(int m);

  int states() const { return m_; }
  std::size_t size() const { return classes_.size(); }
  const std::vector<std::vector<Cell>>& classes() const { return classes_; }
  const std::optional<std::vector<double>>& values() const { return values_; }
  int class_of(Cell c) const { return class_of_[cell_index(c, m_)]; }
  bool same_class(Cell a, Cell b) const { return class_of(a) == class_of(b); }

  // Equality of the cell grouping; class values are ignored.
  bool operator==(const EqualityPartition& other) const {
    return m_ == other.m_ && classes_ == other.classes_;
  }

 private:
  int m_;
  std::vector<std::vector<Cell>> classes_;
  std::optional<std::vector<double>> values_;
  std::vector<int> class_of_;
};

class StationaryDistribution {
 public:
  explicit StationaryDistribution(Eigen::VectorXd pi);

  int states() const { return static_cast<int>(pi_.size()); }
  double operator[](int i) const { return pi_[i]; }
  const Eigen::VectorXd& values() const { return pi_; }

 private:
  Eigen::VectorXd pi_;
};

TransitionMatrix validate_matrix(const Eigen::MatrixXd& entries, Validity mode);

enum class InitialLaw { fixed, stationary, uniform };

struct InitialState {
  InitialLaw law = InitialLaw::stationary;
  int state = 1;  // one-based; used when law == fixed
};

StateSequence simulate_sequence(const TransitionMatrix& P, std::size_t length,
                                std::uint64_t seed, InitialState initial = {});

TransitionCounts count_transitions(const StateSequence& seq);

StationaryDistribution stationary_distribution(const TransitionMatrix& P);

// Cells a, b share a class when |p_a - p_b| <= tol, closed transitively.
// Each class carries the mean of its members.
EqualityPartition extract_equality_classes(const TransitionMatrix& P, double tol);
EqualityPartition extract_equality_classes(const Eigen::MatrixXd& entries, double tol);

// A random sequence whose transition counts equal `counts` exactly: a
// random Eulerian trail through the transition multigraph, built from a
// random last-exit arborescence.
StateSequence realize_counts(const TransitionCounts& counts, std::uint64_t seed);

}  // namespace mcfuse

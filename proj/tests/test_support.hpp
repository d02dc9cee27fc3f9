#pragma once

#include "mcfuse/chain.hpp"

#include <initializer_list>

namespace mcfuse::testing {

inline Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto m = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd M(m, static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double x : row) M(i, j++) = x;
    ++i;
  }
  return M;
}

inline TransitionMatrix matrix(std::initializer_list<std::initializer_list<double>> values,
                               Validity mode = Validity::strict_ergodic) {
  return validate_matrix(rows(values), mode);
}

inline TransitionCounts counts(std::initializer_list<std::initializer_list<double>> values) {
  return TransitionCounts(rows(values).cast<std::int64_t>());
}

// Four-nucleotide transition counts (A, C, G, T).
inline TransitionCounts acgt_counts() {
  return counts({{896, 478, 625, 927},
                 {665, 462, 218, 579},
                 {645, 440, 466, 531},
                 {720, 543, 774, 1030}});
}

// Three-state chain with two groups of equal entries.
inline TransitionMatrix three_state_truth() {
  return matrix({{0.4, 0.2, 0.4}, {0.5, 0.3, 0.2}, {0.4, 0.34, 0.26}});
}

inline TransitionCounts three_state_counts() {
  return counts({{8508, 4277, 8583}, {6823, 3985, 2684}, {6038, 5230, 3871}});
}

// Three-state chain with p12 = p32 and no other ties.
inline TransitionMatrix equal_pair_truth() {
  return matrix({{0.4, 0.1, 0.5}, {0.45, 0.3, 0.25}, {0.2, 0.1, 0.7}});
}

}  // namespace mcfuse::testing

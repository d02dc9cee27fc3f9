#pragma once

// Optimizer shared by the penalized estimators and the equality-constrained
// MLE. Variables are one value per class of an EqualityPartition; every cell
// of a class carries its class value. With the all-singletons partition this
// is the full m*m problem.
//
//   F(v) = sum_c -N_c log v_c
//        + sum_links W_ab * sqrt((v_a - v_b)^2 + mu^2)
//        - tau * sum_c k_c log(v_c - floor)
//
// subject to the row-sum equalities A v = 1, where N_c is the pooled count of
// class c, k_c its number of cells, and A(i, c) the number of cells of class c
// in row i. mu = tau = 0 gives the exact (non-smooth) objective.

#include "mcfuse/chain.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mcfuse::detail {

// Classes this close to the floor count as sitting on it in KKT checks; the
// barrier keeps them slightly above it.
inline constexpr double kBoundTolerance = 1e-6;

// Penalty term weight * |p_a - p_b| between two cells (row-major indices).
struct CellPairTerm {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

struct ClassLink {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

class ClassProblem {
 public:
  ClassProblem(const TransitionCounts& counts, const EqualityPartition& partition,
               const std::vector<CellPairTerm>& terms, double floor);

  int states() const { return m_; }
  int classes() const { return static_cast<int>(class_counts_.size()); }
  double floor() const { return floor_; }
  const std::vector<ClassLink>& links() const { return links_; }
  const Eigen::MatrixXd& null_space() const { return null_space_; }

  double value(const Eigen::VectorXd& v, double mu, double tau) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& v, double mu, double tau) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& v, double mu, double tau) const;
  double exact_value(const Eigen::VectorXd& v) const { return value(v, 0.0, 0.0); }

  Eigen::MatrixXd expand(const Eigen::VectorXd& v) const;
  Eigen::VectorXd restrict(const Eigen::MatrixXd& cells) const;

  // Largest |A v - 1| over rows.
  double row_violation(const Eigen::VectorXd& v) const;
  // Least-squares correction onto A v = 1.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  // Strictly interior feasible point close to the class means of `guess`.
  Eigen::VectorXd feasible_point(const Eigen::MatrixXd& guess) const;

  // Relative KKT residual of the exact problem at v. Links whose class values
  // differ by at most tie_tol get a free subgradient in [-1, 1]; classes at
  // within bound_tol of the floor get a nonnegative bound multiplier. The free variables are
  // fitted by box-constrained least squares after eliminating the row
  // multipliers; the result is the infinity norm of what is left, divided by
  // max(1, max_c N_c / v_c).
  double kkt_residual(const Eigen::VectorXd& v, double tie_tol, double bound_tol = 0.0) const;

 private:
  int m_;
  double floor_;
  std::vector<int> cell_class_;
  Eigen::VectorXd class_counts_;
  Eigen::VectorXd class_sizes_;
  Eigen::MatrixXd rows_;
  std::vector<ClassLink> links_;
  Eigen::MatrixXd null_space_;
  Eigen::JacobiSVD<Eigen::MatrixXd> rows_svd_;
};

struct NewtonSettings {
  int max_iterations = 100;
  // Stop when half the squared Newton decrement falls below tol * max(1, |F|).
  double tol = 1e-14;
  // Projected gradient, relative to the largest gradient entry.
  double gradient_tol = 1e-11;
};

struct NewtonOutcome {
  Eigen::VectorXd v;
  int iterations = 0;
  bool converged = false;
};

// Equality-constrained damped Newton from a strictly feasible start.
NewtonOutcome minimize(const ClassProblem& problem, Eigen::VectorXd v, double mu,
                       double tau, const NewtonSettings& settings = {});

struct Continuation {
  double mu_start = 1e-2;
  double mu_end = 1e-8;
  double mu_factor = 10.0;
  // Barrier weight tau = barrier_ratio * mu at every stage.
  double barrier_ratio = 1e-3;
};

struct ContinuationOutcome {
  Eigen::VectorXd v;
  int iterations = 0;
  bool converged = true;
};

ContinuationOutcome continuation(const ClassProblem& problem, Eigen::VectorXd v,
                                 const Continuation& schedule,
                                 const NewtonSettings& settings = {});

}  // namespace mcfuse::detail

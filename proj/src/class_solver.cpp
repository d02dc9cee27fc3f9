#include "mcfuse/detail/class_solver.hpp"

#include "mcfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcfuse::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smoothed |x| and its first two derivatives.
double smooth_abs(double x, double mu) { return std::sqrt(x * x + mu * mu); }

double smooth_abs_slope(double x, double mu) {
  const double r = std::sqrt(x * x + mu * mu);
  return r > 0.0 ? x / r : 0.0;
}

double smooth_abs_curvature(double x, double mu) {
  if (mu == 0.0) return 0.0;
  const double r2 = x * x + mu * mu;
  return mu * mu / (r2 * std::sqrt(r2));
}

}  // namespace

ClassProblem::ClassProblem(const TransitionCounts& counts, const EqualityPartition& partition,
                           const std::vector<CellPairTerm>& terms, double floor)
    : m_(counts.states()), floor_(floor) {
  if (partition.states() != m_) {
    throw MismatchError("partition and counts have different state counts");
  }
  const int C = static_cast<int>(partition.size());
  const int cells = m_ * m_;
  cell_class_.resize(cells);
  class_counts_ = Eigen::VectorXd::Zero(C);
  class_sizes_ = Eigen::VectorXd::Zero(C);
  rows_ = Eigen::MatrixXd::Zero(m_, C);
  for (int k = 0; k < cells; ++k) {
    const Cell cell = cell_at(k, m_);
    const int c = partition.class_of(cell);
    cell_class_[k] = c;
    class_counts_[c] += static_cast<double>(counts(cell));
    class_sizes_[c] += 1.0;
    rows_(cell.row, c) += 1.0;
  }

  // Pairs inside one class have zero difference and drop out.
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(C, C);
  for (const CellPairTerm& t : terms) {
    int a = cell_class_[t.a];
    int b = cell_class_[t.b];
    if (a == b || t.weight == 0.0) continue;
    if (a > b) std::swap(a, b);
    weight(a, b) += t.weight;
  }
  for (int a = 0; a < C; ++a) {
    for (int b = a + 1; b < C; ++b) {
      if (weight(a, b) != 0.0) links_.push_back({a, b, weight(a, b)});
    }
  }

  // Partitions can make row constraints redundant (e.g. one class spanning
  // two whole rows), so A is rank-revealed rather than assumed full rank.
  rows_svd_.setThreshold(1e-10);
  rows_svd_.compute(rows_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  null_space_ = rows_svd_.matrixV().rightCols(C - rows_svd_.rank());
}

double ClassProblem::value(const Eigen::VectorXd& v, double mu, double tau) const {
  double f = 0.0;
  for (int c = 0; c < classes(); ++c) {
    if (!(v[c] > floor_) && (tau > 0.0 || !(v[c] >= floor_))) return kInf;
    if (class_counts_[c] > 0.0) f -= class_counts_[c] * std::log(v[c]);
    if (tau > 0.0) f -= tau * class_sizes_[c] * std::log(v[c] - floor_);
  }
  for (const ClassLink& l : links_) f += l.weight * smooth_abs(v[l.a] - v[l.b], mu);
  return f;
}

Eigen::VectorXd ClassProblem::gradient(const Eigen::VectorXd& v, double mu, double tau) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(classes());
  for (int c = 0; c < classes(); ++c) {
    if (class_counts_[c] > 0.0) g[c] -= class_counts_[c] / v[c];
    if (tau > 0.0) g[c] -= tau * class_sizes_[c] / (v[c] - floor_);
  }
  for (const ClassLink& l : links_) {
    const double s = l.weight * smooth_abs_slope(v[l.a] - v[l.b], mu);
    g[l.a] += s;
    g[l.b] -= s;
  }
  return g;
}

Eigen::MatrixXd ClassProblem::hessian(const Eigen::VectorXd& v, double mu, double tau) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(classes(), classes());
  for (int c = 0; c < classes(); ++c) {
    if (class_counts_[c] > 0.0) H(c, c) += class_counts_[c] / (v[c] * v[c]);
    if (tau > 0.0) {
      const double gap = v[c] - floor_;
      H(c, c) += tau * class_sizes_[c] / (gap * gap);
    }
  }
  for (const ClassLink& l : links_) {
    const double h = l.weight * smooth_abs_curvature(v[l.a] - v[l.b], mu);
    H(l.a, l.a) += h;
    H(l.b, l.b) += h;
    H(l.a, l.b) -= h;
    H(l.b, l.a) -= h;
  }
  return H;
}

Eigen::MatrixXd ClassProblem::expand(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd P(m_, m_);
  for (int k = 0; k < m_ * m_; ++k) P(k / m_, k % m_) = v[cell_class_[k]];
  return P;
}

Eigen::VectorXd ClassProblem::restrict(const Eigen::MatrixXd& cells) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(classes());
  for (int k = 0; k < m_ * m_; ++k) v[cell_class_[k]] += cells(k / m_, k % m_);
  return v.cwiseQuotient(class_sizes_);
}

double ClassProblem::row_violation(const Eigen::VectorXd& v) const {
  return (rows_ * v - Eigen::VectorXd::Ones(m_)).cwiseAbs().maxCoeff();
}

Eigen::VectorXd ClassProblem::project(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd residual = rows_ * v - Eigen::VectorXd::Ones(m_);
  return v - rows_svd_.solve(residual);
}

Eigen::VectorXd ClassProblem::feasible_point(const Eigen::MatrixXd& guess) const {
  // Every row holds m cells, so the uniform matrix is feasible for any
  // partition; blend toward it until the point is safely interior.
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(classes(), 1.0 / m_);
  Eigen::VectorXd v = project(restrict(guess));
  if (!v.allFinite() || row_violation(v) > 1e-9) v = uniform;

  const double margin = std::max(1e-6, 100.0 * floor_);
  double theta = 1.0;
  for (int c = 0; c < classes(); ++c) {
    if (v[c] < margin) theta = std::min(theta, (uniform[c] - margin) / (uniform[c] - v[c]));
  }
  if (theta < 1.0) v = uniform + 0.9 * theta * (v - uniform);
  if (row_violation(v) > 1e-9) {
    throw InfeasibleError("no feasible point satisfies the row-sum constraints");
  }
  return v;
}

double ClassProblem::kkt_residual(const Eigen::VectorXd& v, double tie_tol,
                                  double bound_tol) const {
  const int C = classes();
  const Eigen::MatrixXd& Z = null_space_;
  if (Z.cols() == 0) return 0.0;

  double scale = 1.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(C);
  for (int c = 0; c < C; ++c) {
    if (class_counts_[c] > 0.0) {
      g[c] = -class_counts_[c] / v[c];
      scale = std::max(scale, std::abs(g[c]));
    }
  }

  // Free subgradient variables: tied links in [-1, 1], bound multipliers >= 0.
  struct Free {
    Eigen::VectorXd column;
    double lo, hi;
  };
  std::vector<Free> free;
  for (const ClassLink& l : links_) {
    const double x = v[l.a] - v[l.b];
    Eigen::VectorXd col = Eigen::VectorXd::Zero(C);
    col[l.a] = l.weight;
    col[l.b] = -l.weight;
    if (std::abs(x) <= tie_tol) {
      free.push_back({Z * (Z.transpose() * col), -1.0, 1.0});
    } else {
      g += (x > 0.0 ? 1.0 : -1.0) * col;
    }
  }
  for (int c = 0; c < C; ++c) {
    if (v[c] - floor_ <= std::max(bound_tol, 1e-3 * floor_)) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(C);
      col[c] = -1.0;
      free.push_back({Z * (Z.transpose() * col), 0.0, kInf});
    }
  }

  Eigen::VectorXd r = Z * (Z.transpose() * g);
  std::vector<double> x(free.size(), 0.0);
  std::vector<double> norm2(free.size());
  for (std::size_t j = 0; j < free.size(); ++j) norm2[j] = free[j].column.squaredNorm();

  // Cyclic coordinate descent on the box-constrained least-squares problem.
  for (int sweep = 0; sweep < 20000 && !free.empty(); ++sweep) {
    double biggest = 0.0;
    for (std::size_t j = 0; j < free.size(); ++j) {
      if (norm2[j] <= 0.0) continue;
      const double target = x[j] - r.dot(free[j].column) / norm2[j];
      const double next = std::clamp(target, free[j].lo, free[j].hi);
      const double delta = next - x[j];
      if (delta != 0.0) {
        r += delta * free[j].column;
        x[j] = next;
        biggest = std::max(biggest, std::abs(delta) * std::sqrt(norm2[j]));
      }
    }
    if (biggest <= 1e-15 * scale) break;
  }
  return r.cwiseAbs().maxCoeff() / scale;
}

NewtonOutcome minimize(const ClassProblem& problem, Eigen::VectorXd v, double mu, double tau,
                       const NewtonSettings& settings) {
  const Eigen::MatrixXd& Z = problem.null_space();
  NewtonOutcome out;
  if (Z.cols() == 0) {
    out.v = std::move(v);
    out.converged = true;
    return out;
  }

  double f = problem.value(v, mu, tau);
  if (!std::isfinite(f)) throw DomainError("Newton start point is not strictly feasible");
  const double floor = problem.floor();

  for (int it = 0; it < settings.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd g = problem.gradient(v, mu, tau);
    const Eigen::VectorXd gz = Z.transpose() * g;
    Eigen::MatrixXd Hz = Z.transpose() * problem.hessian(v, mu, tau) * Z;
    Hz = 0.5 * (Hz + Hz.transpose());

    Eigen::LLT<Eigen::MatrixXd> llt(Hz);
    double damping = 1e-12 * std::max(1.0, Hz.diagonal().cwiseAbs().maxCoeff());
    while (llt.info() != Eigen::Success) {
      llt.compute(Hz + damping * Eigen::MatrixXd::Identity(Hz.rows(), Hz.cols()));
      damping *= 10.0;
    }
    const Eigen::VectorXd d = Z * llt.solve(-gz);
    const double decrement = -g.dot(d);
    const double scale = std::max(1.0, std::abs(f));
    // A small decrement alone still allows sizeable gradients along stiff
    // directions, so the projected gradient has to be small as well.
    const double stationarity =
        (Z * gz).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());
    if (!(decrement > 0.0) ||
        (0.5 * decrement <= settings.tol * scale && stationarity <= settings.gradient_tol)) {
      out.converged = true;
      break;
    }

    double t = 1.0;
    for (int c = 0; c < v.size(); ++c) {
      if (d[c] < 0.0) t = std::min(t, 0.99 * (v[c] - floor) / -d[c]);
    }
    // Armijo with a round-off allowance so steps at the noise floor still count.
    const double slack = 1e-14 * scale;
    bool accepted = false;
    for (int halving = 0; halving < 80; ++halving, t *= 0.5) {
      const Eigen::VectorXd trial = v + t * d;
      const double ft = problem.value(trial, mu, tau);
      if (std::isfinite(ft) && ft <= f - 1e-4 * t * decrement + slack) {
        v = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = 0.5 * decrement <= 1e-9 * scale;
      break;
    }
  }
  out.v = problem.project(v);
  // The correction is at round-off level; keep it only if it stays interior.
  if (!std::isfinite(problem.value(out.v, mu, tau))) out.v = v;
  return out;
}

ContinuationOutcome continuation(const ClassProblem& problem, Eigen::VectorXd v,
                                 const Continuation& schedule, const NewtonSettings& settings) {
  ContinuationOutcome out;
  for (double mu = schedule.mu_start;; mu /= schedule.mu_factor) {
    NewtonOutcome stage = minimize(problem, std::move(v), mu, schedule.barrier_ratio * mu, settings);
    v = std::move(stage.v);
    out.iterations += stage.iterations;
    out.converged = stage.converged;
    if (mu <= schedule.mu_end * (1.0 + 1e-9)) break;
  }
  out.v = std::move(v);
  return out;
}

}  // namespace mcfuse::detail

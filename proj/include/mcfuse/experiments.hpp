#pragma once

#include "mcfuse/chain.hpp"
#include "mcfuse/model_selection.hpp"
#include "mcfuse/penalized.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcfuse {

enum class Estimator { mle, mclasso, mcalasso };

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);

struct StudyConfig {
  TransitionMatrix truth;
  int n_reps = 20;
  std::size_t length = 20000;  // states per simulated sequence
  std::uint64_t seed_base = 1;
  std::vector<double> grid;
  int k = kDefaultFolds;
  std::vector<Estimator> methods{Estimator::mle, Estimator::mclasso, Estimator::mcalasso};
  double gamma = 1.0;
  // When set, every replicate uses this lambda instead of running CV.
  std::optional<double> fixed_lambda;
  SolverOptions solver{};
  int threads = 1;
};

// 20 replicates of length 20,000 with a 15-point grid.
StudyConfig desk_profile(TransitionMatrix truth);
// 100 replicates of length 50,000 with a 30-point grid.
StudyConfig full_profile(TransitionMatrix truth);

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::mle;
  double lambda = 0.0;
  double purity = 0.0;
  double frobenius = 0.0;
  double selection_accuracy = 0.0;
  std::size_t fused_pairs = 0;
  // Every pair that is equal in the truth is fused in the estimate.
  bool detected = false;
};

struct ReplicateFailure {
  int replicate = 0;
  Estimator estimator = Estimator::mle;
  std::string code;
  std::string message;
};

struct Summary {
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
};

// Type-7 quantiles (linear interpolation between order statistics).
Summary summarize(std::vector<double> values);

struct EstimatorSummary {
  Estimator estimator = Estimator::mle;
  Summary purity;
  Summary frobenius;
  Summary selection_accuracy;
  Summary lambda;
  std::size_t detections_total = 0;
  std::size_t detections_true = 0;
  std::size_t detections_false = 0;
};

struct StudySummary {
  std::vector<EstimatorSummary> estimators;  // in config.methods order
  std::vector<ReplicateRecord> raw;          // by replicate, then method
  std::vector<ReplicateFailure> failures;
};

StudySummary run_study(const StudyConfig& config);

// p_hat_a - p_hat_b of the MLE for each replicate.
std::vector<double> difference_histogram(const TransitionMatrix& truth, Cell a, Cell b,
                                         std::size_t length, int n_reps,
                                         std::uint64_t seed_base, int threads = 1);

void write_summary_csv(std::ostream& out, const StudySummary& summary);
void write_raw_csv(std::ostream& out, const StudySummary& summary);
void write_hist_csv(std::ostream& out, const std::vector<double>& differences);

// Shortest round-trip decimal form.
std::string format_number(double x);

}  // namespace mcfuse

#include "mcfuse/experiments.hpp"

#include "mcfuse/detail/parallel.hpp"
#include "mcfuse/error.hpp"
#include "mcfuse/estimators.hpp"
#include "mcfuse/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace mcfuse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReplicateResult {
  std::vector<ReplicateRecord> records;
  std::vector<ReplicateFailure> failures;
};

Method as_method(Estimator e) {
  return e == Estimator::mclasso ? Method::mclasso : Method::mcalasso;
}

void validate(const StudyConfig& config) {
  if (config.n_reps < 1) throw DomainError("a study needs at least one replicate");
  if (config.k < 2) throw DomainError("cross-validation needs at least 2 folds");
  if (config.length < 2 * static_cast<std::size_t>(config.k)) {
    throw TooShortError("sequence length is too short for the fold count");
  }
  if (config.methods.empty()) throw DomainError("a study needs at least one method");
  const bool penalized = std::any_of(config.methods.begin(), config.methods.end(),
                                     [](Estimator e) { return e != Estimator::mle; });
  if (penalized && !config.fixed_lambda && config.grid.empty()) {
    throw DomainError("penalized methods need a lambda grid or a fixed lambda");
  }
}

ReplicateResult run_replicate(const StudyConfig& config, const EqualityPartition& truth_classes,
                              const PairSet& pairs, int r) {
  ReplicateResult out;
  const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(r);
  const StateSequence seq = simulate_sequence(config.truth, config.length, seed);
  const TransitionCounts counts = count_transitions(seq);
  std::optional<FoldCounts> folds;

  for (Estimator method : config.methods) {
    try {
      ReplicateRecord rec{.replicate = r, .seed = seed, .estimator = method};
      std::optional<TransitionMatrix> estimate;
      std::optional<EqualityPartition> classes;
      if (method == Estimator::mle) {
        estimate = mle(counts);
        // Count ratios are compared exactly: equal rationals give equal doubles.
        classes = extract_equality_classes(*estimate, 0.0);
      } else {
        const CvOptions cv{.k = config.k,
                           .method = as_method(method),
                           .gamma = config.gamma,
                           .solver = config.solver};
        if (config.fixed_lambda) {
          rec.lambda = *config.fixed_lambda;
        } else {
          if (!folds) folds = fold_counts(seq, config.k);
          rec.lambda = select_lambda(*folds, config.grid, cv).best_lambda;
        }
        PenalizedFit fit =
            fit_penalized(counts, rec.lambda, as_method(method), config.gamma, config.solver);
        estimate = std::move(fit.estimate);
        classes = std::move(fit.fused_partition);
      }
      rec.purity = purity(truth_classes, *classes);
      rec.frobenius = frobenius_distance(config.truth, *estimate);
      rec.selection_accuracy = selection_accuracy(config.truth, *classes);

      bool any_equal = false;
      bool all_fused = true;
      for (std::size_t t = 0; t < pairs.size(); ++t) {
        const bool fused = classes->same_class(pairs.first(t), pairs.second(t));
        rec.fused_pairs += fused;
        if (truth_classes.same_class(pairs.first(t), pairs.second(t))) {
          any_equal = true;
          all_fused = all_fused && fused;
        }
      }
      rec.detected = any_equal && all_fused;
      out.records.push_back(rec);
    } catch (const Error& e) {
      out.failures.push_back({r, method, e.code(), e.what()});
    }
  }
  return out;
}

double quantile7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::mle:
      return "mle";
    case Estimator::mclasso:
      return "mclasso";
    case Estimator::mcalasso:
      return "mcalasso";
  }
  return "mle";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "mle") return Estimator::mle;
  if (name == "mclasso" || name == "lasso") return Estimator::mclasso;
  if (name == "mcalasso" || name == "alasso") return Estimator::mcalasso;
  throw ParseError("unknown estimator '" + std::string(name) + "'");
}

StudyConfig desk_profile(TransitionMatrix truth) {
  return StudyConfig{
      .truth = std::move(truth),
      .n_reps = 20,
      .length = 20000,
      .grid = log_grid(0.01, 100.0, 15),
  };
}

StudyConfig full_profile(TransitionMatrix truth) {
  return StudyConfig{
      .truth = std::move(truth),
      .n_reps = 100,
      .length = 50000,
      .grid = log_grid(0.01, 100.0, 30),
  };
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    s.min = s.q1 = s.median = s.mean = s.q3 = s.max = kNaN;
    return s;
  }
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile7(values, 0.25);
  s.median = quantile7(values, 0.5);
  s.q3 = quantile7(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  // Keep the mean inside [min, max] despite round-off.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

StudySummary run_study(const StudyConfig& config) {
  validate(config);
  const EqualityPartition truth_classes = truth_partition(config.truth);
  const PairSet pairs = pair_set(config.truth.states());

  std::vector<ReplicateResult> results(static_cast<std::size_t>(config.n_reps));
  detail::parallel_for(results.size(), config.threads, [&](std::size_t r) {
    results[r] = run_replicate(config, truth_classes, pairs, static_cast<int>(r));
  });

  StudySummary summary;
  for (ReplicateResult& r : results) {
    summary.raw.insert(summary.raw.end(), r.records.begin(), r.records.end());
    summary.failures.insert(summary.failures.end(), r.failures.begin(), r.failures.end());
  }
  for (Estimator method : config.methods) {
    std::vector<double> pur, fro, sel, lam;
    EstimatorSummary es{.estimator = method};
    for (const ReplicateRecord& rec : summary.raw) {
      if (rec.estimator != method) continue;
      pur.push_back(rec.purity);
      fro.push_back(rec.frobenius);
      sel.push_back(rec.selection_accuracy);
      lam.push_back(rec.lambda);
      ++es.detections_total;
      (rec.detected ? es.detections_true : es.detections_false) += 1;
    }
    es.purity = summarize(std::move(pur));
    es.frobenius = summarize(std::move(fro));
    es.selection_accuracy = summarize(std::move(sel));
    es.lambda = summarize(std::move(lam));
    summary.estimators.push_back(es);
  }
  return summary;
}

std::vector<double> difference_histogram(const TransitionMatrix& truth, Cell a, Cell b,
                                         std::size_t length, int n_reps,
                                         std::uint64_t seed_base, int threads) {
  const int m = truth.states();
  for (Cell c : {a, b}) {
    if (c.row < 0 || c.row >= m || c.col < 0 || c.col >= m) {
      throw ShapeError("cell is outside the matrix");
    }
  }
  if (n_reps < 1) throw DomainError("histogram needs at least one replicate");
  std::vector<double> out(static_cast<std::size_t>(n_reps));
  detail::parallel_for(out.size(), threads, [&](std::size_t r) {
    const StateSequence seq = simulate_sequence(truth, length, seed_base + r);
    const TransitionMatrix P = mle(count_transitions(seq), ZeroRowPolicy::uniform);
    out[r] = P(a) - P(b);
  });
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_summary_csv(std::ostream& out, const StudySummary& summary) {
  out << "estimator,metric,count,min,q1,median,mean,q3,max,detected_true,detected_false\n";
  for (const EstimatorSummary& es : summary.estimators) {
    const auto name = estimator_name(es.estimator);
    auto row = [&](std::string_view metric, const Summary& s) {
      out << name << ',' << metric << ',' << s.count << ',' << format_number(s.min) << ','
          << format_number(s.q1) << ',' << format_number(s.median) << ','
          << format_number(s.mean) << ',' << format_number(s.q3) << ','
          << format_number(s.max) << ",,\n";
    };
    row("purity", es.purity);
    row("frobenius", es.frobenius);
    row("selection_accuracy", es.selection_accuracy);
    row("lambda", es.lambda);
    out << name << ",equality_detection," << es.detections_total << ",,,,,,,"
        << es.detections_true << ',' << es.detections_false << '\n';
  }
}

void write_raw_csv(std::ostream& out, const StudySummary& summary) {
  out << "replicate,seed,estimator,lambda,metric,value\n";
  for (const ReplicateRecord& rec : summary.raw) {
    const std::string prefix = std::to_string(rec.replicate) + ',' + std::to_string(rec.seed) +
                               ',' + std::string(estimator_name(rec.estimator)) + ',' +
                               format_number(rec.lambda) + ',';
    out << prefix << "purity," << format_number(rec.purity) << '\n';
    out << prefix << "frobenius," << format_number(rec.frobenius) << '\n';
    out << prefix << "selection_accuracy," << format_number(rec.selection_accuracy) << '\n';
    out << prefix << "fused_pairs," << rec.fused_pairs << '\n';
    out << prefix << "detected," << (rec.detected ? 1 : 0) << '\n';
  }
}

void write_hist_csv(std::ostream& out, const std::vector<double>& differences) {
  out << "replicate,difference\n";
  for (std::size_t r = 0; r < differences.size(); ++r) {
    out << r << ',' << format_number(differences[r]) << '\n';
  }
}

}  // namespace mcfuse

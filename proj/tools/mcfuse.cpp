// Command-line front end: simulate, count, estimate, test, fit, cross-validate,
// score and run studies.

#include "mcfuse/chain.hpp"
#include "mcfuse/error.hpp"
#include "mcfuse/estimators.hpp"
#include "mcfuse/experiments.hpp"
#include "mcfuse/io.hpp"
#include "mcfuse/metrics.hpp"
#include "mcfuse/model_selection.hpp"
#include "mcfuse/penalized.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace mcfuse;
using nlohmann::json;

enum class Format { text, json, csv };

struct Common {
  std::string format = "text";
  std::string out;
  std::string alphabet;
  int states = 0;
  std::string counts;
  std::string sequence;
  int decimals = 6;
};

Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw ParseError("unknown format '" + s + "'");
}

std::optional<AlphabetMap> alphabet_of(const Common& c) {
  if (c.alphabet.empty()) return std::nullopt;
  return load_alphabet(c.alphabet);
}

std::optional<int> states_of(const Common& c) {
  return c.states > 0 ? std::optional<int>(c.states) : std::nullopt;
}

StateSequence load_sequence(const Common& c) {
  return parse_sequence(read_file(c.sequence), alphabet_of(c), states_of(c));
}

TransitionCounts load_counts(const Common& c) {
  if (!c.counts.empty() && !c.sequence.empty()) {
    throw ParseError("give either --counts or --sequence, not both");
  }
  if (!c.counts.empty()) return parse_counts(read_file(c.counts));
  if (!c.sequence.empty()) return count_transitions(load_sequence(c));
  throw ParseError("an input is required: --counts or --sequence");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void add_output(CLI::App* app, Common& c, const std::string& formats) {
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember(
      [&] {
        std::vector<std::string> v;
        std::stringstream ss(formats);
        for (std::string f; std::getline(ss, f, '|');) v.push_back(f);
        return v;
      }()));
  app->add_option("--out", c.out, "Write output to a file instead of stdout");
}

void add_input(CLI::App* app, Common& c) {
  app->add_option("--counts", c.counts, "Transition counts (CSV or JSON)");
  app->add_option("--sequence", c.sequence, "State sequence file");
  app->add_option("--alphabet", c.alphabet, "Symbol alphabet: ACGT or file:<path>");
  app->add_option("--states", c.states, "Number of states for integer sequences");
  app->add_option("--decimals", c.decimals, "Decimals for text output")->check(CLI::Range(0, 17));
}

std::vector<double> parse_grid(const std::string& list, const std::string& range) {
  if (!list.empty()) {
    std::vector<double> grid;
    std::stringstream ss(list);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        std::size_t used = 0;
        grid.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("invalid grid value '" + tok + "'");
      }
    }
    return grid;
  }
  double lo = 0.0, hi = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(range);
  if (!(ss >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || !ss.eof()) {
    throw ParseError("grid range must look like lo:hi:count, got '" + range + "'");
  }
  return log_grid(lo, hi, count);
}

Method parse_method(const std::string& s) {
  const Estimator e = parse_estimator(s);
  if (e == Estimator::mle) throw ParseError("a penalized method is required (mclasso or mcalasso)");
  return e == Estimator::mclasso ? Method::mclasso : Method::mcalasso;
}

ZeroRowPolicy parse_zero_rows(const std::string& s) {
  if (s == "error") return ZeroRowPolicy::error;
  if (s == "uniform") return ZeroRowPolicy::uniform;
  throw ParseError("zero-row policy must be error or uniform");
}

std::string partition_text(const EqualityPartition& p, const std::optional<AlphabetMap>& a) {
  std::string out;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const auto& cells = p.classes()[c];
    if (cells.size() < 2) continue;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out += (k ? " = " : "  ") + cell_label(cells[k], a);
    }
    if (p.values()) out += "  (" + std::to_string((*p.values())[c]) + ")";
    out += '\n';
  }
  return out.empty() ? "  none\n" : out;
}

std::string fmt(double x, int decimals) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(decimals);
  ss << x;
  return ss.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Markov chain transition matrix estimation with fused penalties"};
  app.require_subcommand(1);
  Common c;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a chain, or realize a sequence from counts");
  std::string sim_matrix, sim_from_counts, sim_initial = "stationary";
  std::size_t sim_length = 0;
  std::uint64_t seed = 0;
  sim->add_option("--matrix", sim_matrix, "Transition matrix to simulate from");
  sim->add_option("--from-counts", sim_from_counts,
                  "Counts to realize exactly as a random sequence");
  sim->add_option("--length", sim_length, "Sequence length (number of states)");
  sim->add_option("--initial", sim_initial, "Initial law: stationary, uniform or a state number");
  sim->add_option("--seed", seed, "Random seed")->required();
  sim->add_option("--alphabet", c.alphabet, "Write symbols of this alphabet");
  add_output(sim, c, "text|json|csv");

  // counts
  auto* cnt = app.add_subcommand("counts", "Count transitions in a sequence");
  add_input(cnt, c);
  add_output(cnt, c, "text|json|csv");

  // estimate
  auto* est = app.add_subcommand("estimate", "Unpenalized estimators");
  std::string est_method = "mle", est_reference, null_text, zero_rows = "error";
  double alpha = 0.0;
  est->add_option("--method", est_method, "mle, bootstrap or constrained")
      ->check(CLI::IsMember({"mle", "bootstrap", "constrained"}));
  est->add_option("--reference", est_reference, "Reference matrix Q for bootstrap (default uniform)");
  est->add_option("--alpha", alpha, "Bootstrap smoothing strength");
  est->add_option("--null", null_text, "Equality groups for the constrained estimator");
  est->add_option("--zero-rows", zero_rows, "error or uniform");
  add_input(est, c);
  add_output(est, c, "text|json|csv");

  // lrt
  auto* lrt_cmd = app.add_subcommand("lrt", "Likelihood-ratio test of equal transitions");
  double level = 0.05;
  lrt_cmd->add_option("--null", null_text, "Equality groups, e.g. AG=GC,AA=GA")->required();
  lrt_cmd->add_option("--level", level, "Test level");
  add_input(lrt_cmd, c);
  add_output(lrt_cmd, c, "text|json|csv");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Penalized fit at a given lambda");
  std::string method = "mcalasso";
  double lambda = 0.0, gamma = 1.0, weight_cap = kDefaultWeightCap;
  SolverOptions solver;
  bool do_refit = false;
  fit_cmd->add_option("--method", method, "mclasso (lasso) or mcalasso (alasso)");
  fit_cmd->add_option("--lambda", lambda, "Penalty strength")->required();
  fit_cmd->add_option("--gamma", gamma, "Adaptive weight exponent");
  fit_cmd->add_option("--weight-cap", weight_cap, "Largest adaptive weight");
  fit_cmd->add_option("--fuse-tol", solver.fuse_tol, "Fusion tolerance");
  fit_cmd->add_option("--zero-rows", zero_rows, "error or uniform");
  fit_cmd->add_option("--seed", seed, "Accepted for symmetry; fitting uses no randomness");
  fit_cmd->add_flag("--refit", do_refit, "Also report the constrained MLE on the fused classes");
  add_input(fit_cmd, c);
  add_output(fit_cmd, c, "text|json|csv");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validated choice of lambda");
  std::string grid_list, grid_range = "0.01:100:30";
  int folds = kDefaultFolds, threads = 1;
  bool cv_fit = false;
  cv_cmd->add_option("--method", method, "mclasso or mcalasso");
  cv_cmd->add_option("--grid", grid_list, "Comma-separated lambda values");
  cv_cmd->add_option("--grid-range", grid_range, "Log grid lo:hi:count");
  cv_cmd->add_option("--folds", folds, "Number of ordered folds")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--gamma", gamma, "Adaptive weight exponent");
  cv_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--seed", seed, "Seed for realizing a sequence from --counts");
  cv_cmd->add_flag("--fit", cv_fit, "Also fit the full data at the selected lambda");
  add_input(cv_cmd, c);
  add_output(cv_cmd, c, "text|json|csv");

  // metrics
  auto* met = app.add_subcommand("metrics", "Compare an estimate with a known truth");
  std::string truth_path, estimate_path;
  met->add_option("--truth", truth_path, "True transition matrix")->required();
  met->add_option("--estimate", estimate_path, "Estimated matrix or fit JSON")->required();
  met->add_option("--fuse-tol", solver.fuse_tol, "Tolerance for the estimate's equality classes");
  add_output(met, c, "text|json|csv");

  // study
  auto* study = app.add_subcommand("study", "Seeded Monte Carlo study");
  std::string profile = "desk", methods_text = "mle,mclasso,mcalasso", out_dir, hist_cells;
  int reps = 0, hist_reps = 1000;
  std::size_t length = 0, hist_length = 0;
  std::optional<double> fixed_lambda;
  study->add_option("--truth", truth_path, "True transition matrix")->required();
  study->add_option("--profile", profile, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  study->add_option("--reps", reps, "Replicates (overrides the profile)");
  study->add_option("--length", length, "Sequence length (overrides the profile)");
  study->add_option("--seed", seed, "Seed of replicate 0; replicate r uses seed + r")->required();
  study->add_option("--grid", grid_list, "Comma-separated lambda values");
  study->add_option("--grid-range", grid_range, "Log grid lo:hi:count (overrides the profile)");
  study->add_option("--methods", methods_text, "Comma-separated subset of mle,mclasso,mcalasso");
  study->add_option("--fixed-lambda", fixed_lambda, "Skip CV and use this lambda");
  study->add_option("--folds", folds, "Number of ordered folds")->check(CLI::PositiveNumber);
  study->add_option("--gamma", gamma, "Adaptive weight exponent");
  study->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  study->add_option("--out-dir", out_dir, "Write summary.csv, raw.csv and hist.csv here");
  study->add_option("--hist-cells", hist_cells,
                    "Cells for the difference histogram, e.g. 1,2;3,2 (default: first equal pair)");
  study->add_option("--hist-reps", hist_reps, "Histogram replicates");
  study->add_option("--hist-length", hist_length, "Histogram sequence length (default: study length)");
  add_output(study, c, "text|json|csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mcfuse-error code=UsageError exit=1\n" << e.what() << '\n';
    return 1;
  }

  const Format format = parse_format(c.format);
  const auto alphabet = alphabet_of(c);

  if (sim->parsed()) {
    if (sim_matrix.empty() == sim_from_counts.empty()) {
      throw ParseError("give exactly one of --matrix or --from-counts");
    }
    std::optional<StateSequence> seq;
    if (!sim_matrix.empty()) {
      if (sim_length == 0) throw ParseError("--length is required with --matrix");
      const TransitionMatrix P = parse_matrix(read_file(sim_matrix));
      InitialState init;
      if (sim_initial == "stationary") {
        init.law = InitialLaw::stationary;
      } else if (sim_initial == "uniform") {
        init.law = InitialLaw::uniform;
      } else {
        init.law = InitialLaw::fixed;
        try {
          init.state = std::stoi(sim_initial);
        } catch (const std::exception&) {
          throw ParseError("initial law must be stationary, uniform or a state number");
        }
      }
      seq = simulate_sequence(P, sim_length, seed, init);
    } else {
      seq = realize_counts(parse_counts(read_file(sim_from_counts)), seed);
    }
    if (alphabet && alphabet->size() != seq->states()) {
      throw MismatchError("alphabet size differs from the number of states");
    }
    if (format == Format::json) {
      emit(c, dump(json{{"states", seq->states()}, {"sequence", seq->values()}}));
    } else if (format == Format::csv) {
      std::string s = "state\n";
      for (int x : seq->values()) {
        if (alphabet) {
          s.push_back(alphabet->symbol_of(x));
        } else {
          s += std::to_string(x);
        }
        s.push_back('\n');
      }
      emit(c, s);
    } else {
      emit(c, format_sequence(*seq, alphabet));
    }
    return 0;
  }

  if (cnt->parsed()) {
    if (c.sequence.empty()) throw ParseError("--sequence is required");
    const TransitionCounts n = count_transitions(load_sequence(c));
    if (format == Format::json) {
      emit(c, dump(json{{"counts", counts_json(n)}, {"total", n.total()}}));
    } else if (format == Format::csv) {
      emit(c, counts_csv(n));
    } else {
      emit(c, format_counts(n, alphabet));
    }
    return 0;
  }

  if (est->parsed()) {
    const TransitionCounts n = load_counts(c);
    std::optional<TransitionMatrix> P;
    if (est_method == "mle") {
      P = mle(n, parse_zero_rows(zero_rows));
    } else if (est_method == "bootstrap") {
      const TransitionMatrix Q = est_reference.empty()
                                     ? TransitionMatrix::uniform(n.states())
                                     : parse_matrix(read_file(est_reference), Validity::strict_ergodic);
      P = bootstrap_mle(n, Q, alpha);
    } else {
      if (null_text.empty()) throw ParseError("--null is required for the constrained estimator");
      P = constrained_mle(n, parse_null_hypothesis(null_text, n.states(), alphabet));
    }
    if (format == Format::json) {
      emit(c, dump(json{{"method", est_method}, {"estimate", matrix_json(P->entries())}}));
    } else if (format == Format::csv) {
      emit(c, matrix_csv(P->entries()));
    } else {
      emit(c, format_matrix(P->entries(), c.decimals, alphabet));
    }
    return 0;
  }

  if (lrt_cmd->parsed()) {
    const TransitionCounts n = load_counts(c);
    const LrtResult r = lrt(n, parse_null_hypothesis(null_text, n.states(), alphabet), level);
    if (format == Format::json) {
      emit(c, dump(lrt_json(r)));
    } else if (format == Format::csv) {
      emit(c, "gamma,df,critical,level,p_value,reject\n" + json(r.gamma).dump() + "," +
                  std::to_string(r.df) + "," + json(r.critical).dump() + "," +
                  json(r.level).dump() + "," + json(r.p_value).dump() + "," +
                  (r.reject ? "true" : "false") + "\n");
    } else {
      std::string s;
      s += "gamma     " + fmt(r.gamma, c.decimals) + "\n";
      s += "df        " + std::to_string(r.df) + "\n";
      s += "critical  " + fmt(r.critical, c.decimals) + "\n";
      s += "p_value   " + fmt(r.p_value, c.decimals) + "\n";
      s += "level     " + fmt(r.level, c.decimals) + "\n";
      s += std::string("decision  ") + (r.reject ? "reject" : "fail to reject") + "\n\n";
      s += "null fit\n" + format_matrix(r.null_fit.entries(), c.decimals, alphabet);
      emit(c, s);
    }
    return 0;
  }

  if (fit_cmd->parsed()) {
    const TransitionCounts n = load_counts(c);
    const Method m = parse_method(method);
    solver.zero_rows = parse_zero_rows(zero_rows);
    const PairSet pairs = pair_set(n.states());
    const PairWeights weights =
        m == Method::mclasso
            ? unit_weights(pairs)
            : adaptive_weights(mle(n, ZeroRowPolicy::uniform), pairs, gamma, weight_cap);
    const PenalizedFit fit = solve(n, lambda, weights, solver);
    std::optional<TransitionMatrix> refitted;
    if (do_refit) refitted = refit(n, fit);
    if (format == Format::json) {
      emit(c, dump(fit_json(fit, method_name(m), refitted)));
    } else if (format == Format::csv) {
      emit(c, matrix_csv(fit.estimate.entries()));
    } else {
      std::string s = std::string(method_name(m)) + "  lambda " + json(fit.lambda).dump() +
                      "  objective " + fmt(fit.objective_value, c.decimals) + "\n";
      s += format_matrix(fit.estimate.entries(), c.decimals, alphabet);
      s += "fused classes\n" + partition_text(fit.fused_partition, alphabet);
      if (refitted) s += "refit\n" + format_matrix(refitted->entries(), c.decimals, alphabet);
      emit(c, s);
    }
    return 0;
  }

  if (cv_cmd->parsed()) {
    std::optional<StateSequence> seq;
    if (!c.sequence.empty() && !c.counts.empty()) {
      throw ParseError("give either --counts or --sequence, not both");
    }
    if (!c.sequence.empty()) {
      seq = load_sequence(c);
    } else if (!c.counts.empty()) {
      if (cv_cmd->count("--seed") == 0) {
        throw ParseError("--seed is required to realize a sequence from --counts");
      }
      seq = realize_counts(parse_counts(read_file(c.counts)), seed);
    } else {
      throw ParseError("an input is required: --sequence or --counts");
    }
    const CvOptions opts{.k = folds, .method = parse_method(method), .gamma = gamma,
                         .threads = threads};
    const CvReport report = select_lambda(*seq, parse_grid(grid_list, grid_range), opts);
    std::optional<PenalizedFit> fit;
    if (cv_fit) {
      fit = fit_penalized(count_transitions(*seq), report.best_lambda, opts.method, gamma);
    }
    if (format == Format::json) {
      json j = cv_json(report);
      if (fit) j["fit"] = fit_json(*fit, method_name(opts.method));
      emit(c, dump(j));
    } else if (format == Format::csv) {
      emit(c, cv_csv(report));
    } else {
      std::string s = "lambda          cv_score\n";
      for (std::size_t g = 0; g < report.grid.size(); ++g) {
        char lam[32];
        std::snprintf(lam, sizeof lam, "%-16.6g", report.grid[g]);
        s += lam + fmt(report.scores[g], c.decimals) + (g == report.best_index ? "  *" : "") + "\n";
      }
      char best[32];
      std::snprintf(best, sizeof best, "%.6g", report.best_lambda);
      s += std::string("best lambda ") + best + "\n";
      if (fit) {
        s += "\n" + format_matrix(fit->estimate.entries(), c.decimals, alphabet);
        s += "fused classes\n" + partition_text(fit->fused_partition, alphabet);
      }
      emit(c, s);
    }
    return 0;
  }

  if (met->parsed()) {
    const TransitionMatrix truth = parse_matrix(read_file(truth_path));
    const TransitionMatrix estimate = parse_matrix(read_file(estimate_path));
    const EqualityPartition classes = extract_equality_classes(estimate, solver.fuse_tol);
    const MetricValues v{
        .purity = purity(truth_partition(truth), classes),
        .frobenius = frobenius_distance(truth, estimate),
        .selection_accuracy = selection_accuracy(truth, classes),
    };
    if (format == Format::json) {
      emit(c, dump(metrics_json(v)));
    } else if (format == Format::csv) {
      emit(c, "purity,frobenius,selection_accuracy\n" + json(v.purity).dump() + "," +
                  json(v.frobenius).dump() + "," + json(v.selection_accuracy).dump() + "\n");
    } else {
      emit(c, "purity              " + fmt(v.purity, c.decimals) + "\nfrobenius           " +
                  fmt(v.frobenius, c.decimals) + "\nselection_accuracy  " +
                  fmt(v.selection_accuracy, c.decimals) + "\n");
    }
    return 0;
  }

  if (study->parsed()) {
    TransitionMatrix truth = parse_matrix(read_file(truth_path), Validity::strict_ergodic);
    StudyConfig config = profile == "full" ? full_profile(truth) : desk_profile(truth);
    if (reps > 0) config.n_reps = reps;
    if (length > 0) config.length = length;
    if (!grid_list.empty() || study->count("--grid-range") > 0) {
      config.grid = parse_grid(grid_list, grid_range);
    }
    config.seed_base = seed;
    config.k = folds;
    config.gamma = gamma;
    config.threads = threads;
    config.fixed_lambda = fixed_lambda;
    config.methods.clear();
    std::stringstream ss(methods_text);
    for (std::string tok; std::getline(ss, tok, ',');) config.methods.push_back(parse_estimator(tok));

    const StudySummary summary = run_study(config);

    std::optional<std::pair<Cell, Cell>> hist_pair;
    if (!hist_cells.empty()) {
      std::string pair_text = hist_cells;
      std::replace(pair_text.begin(), pair_text.end(), ';', '=');
      const EqualityPartition p = parse_null_hypothesis(pair_text, truth.states(), alphabet);
      for (const auto& cls : p.classes()) {
        if (cls.size() == 2) hist_pair = {cls[0], cls[1]};
      }
      if (!hist_pair) throw ParseError("--hist-cells must name two cells, e.g. 1,2;3,2");
    } else {
      const EqualityPartition tp = truth_partition(truth);
      for (const auto& cls : tp.classes()) {
        if (cls.size() >= 2) {
          hist_pair = {cls[0], cls[1]};
          break;
        }
      }
    }

    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ostringstream s1, s2;
      write_summary_csv(s1, summary);
      write_raw_csv(s2, summary);
      write_file(std::filesystem::path(out_dir) / "summary.csv", s1.str());
      write_file(std::filesystem::path(out_dir) / "raw.csv", s2.str());
      if (hist_pair) {
        std::ostringstream s3;
        write_hist_csv(s3, difference_histogram(truth, hist_pair->first, hist_pair->second,
                                                hist_length ? hist_length : config.length,
                                                hist_reps, seed, threads));
        write_file(std::filesystem::path(out_dir) / "hist.csv", s3.str());
      }
    }

    if (format == Format::json) {
      json j{{"n_reps", config.n_reps}, {"length", config.length}, {"seed", config.seed_base}};
      json ests = json::array();
      auto stats = [](const Summary& s) {
        return json{{"count", s.count}, {"min", s.min},   {"q1", s.q1}, {"median", s.median},
                    {"mean", s.mean},   {"q3", s.q3},     {"max", s.max}};
      };
      for (const EstimatorSummary& es : summary.estimators) {
        ests.push_back({{"estimator", estimator_name(es.estimator)},
                        {"purity", stats(es.purity)},
                        {"frobenius", stats(es.frobenius)},
                        {"selection_accuracy", stats(es.selection_accuracy)},
                        {"lambda", stats(es.lambda)},
                        {"detections", {{"total", es.detections_total},
                                        {"true", es.detections_true},
                                        {"false", es.detections_false}}}});
      }
      j["estimators"] = std::move(ests);
      json fails = json::array();
      for (const ReplicateFailure& f : summary.failures) {
        fails.push_back({{"replicate", f.replicate},
                         {"estimator", estimator_name(f.estimator)},
                         {"code", f.code},
                         {"message", f.message}});
      }
      j["failures"] = std::move(fails);
      emit(c, dump(j));
    } else if (format == Format::csv) {
      std::ostringstream out;
      write_summary_csv(out, summary);
      emit(c, out.str());
    } else {
      std::string s = "estimator  metric              mean        median      min         max\n";
      for (const EstimatorSummary& es : summary.estimators) {
        auto row = [&](const char* metric, const Summary& m) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "%-10s %-19s %-11.6f %-11.6f %-11.6f %.6f\n",
                        std::string(estimator_name(es.estimator)).c_str(), metric, m.mean,
                        m.median, m.min, m.max);
          s += buf;
        };
        row("purity", es.purity);
        row("frobenius", es.frobenius);
        row("selection_accuracy", es.selection_accuracy);
        s += std::string(estimator_name(es.estimator)) + "  equality detection: " +
             std::to_string(es.detections_true) + " true, " +
             std::to_string(es.detections_false) + " false of " +
             std::to_string(es.detections_total) + "\n";
      }
      s += "failed replicate fits: " + std::to_string(summary.failures.size()) + "\n";
      emit(c, s);
    }
    return 0;
  }
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
      return 1;
    case ErrorKind::numerical:
      return 2;
    case ErrorKind::io:
      return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mcfuse::Error& e) {
    const int code = exit_code(e.kind());
    std::cerr << "mcfuse-error code=" << e.code() << " exit=" << code << '\n' << e.what() << '\n';
    return code;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "mcfuse-error code=IoError exit=3\n" << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "mcfuse-error code=InternalError exit=2\n" << e.what() << '\n';
    return 2;
  }
}

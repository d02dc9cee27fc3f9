#pragma once

#include "mcfuse/chain.hpp"
#include "mcfuse/estimators.hpp"
#include "mcfuse/metrics.hpp"
#include "mcfuse/model_selection.hpp"
#include "mcfuse/penalized.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcfuse {

// Single-character symbols mapped to states 1..m in the listed order.
class AlphabetMap {
 public:
  explicit AlphabetMap(std::string symbols);

  static AlphabetMap acgt() { return AlphabetMap("ACGT"); }

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbols() const { return symbols_; }
  // Case-insensitive; 0 when the symbol is unknown.
  int state_of(char symbol) const;
  char symbol_of(int state) const { return symbols_[static_cast<std::size_t>(state - 1)]; }

 private:
  std::string symbols_;
};

// "ACGT" or "file:<path>" (a file listing the symbols, whitespace ignored).
AlphabetMap load_alphabet(std::string_view spec);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// With an alphabet: symbols, whitespace and FASTA '>' header lines ignored.
// Without: integers 1..m separated by whitespace or commas; m defaults to
// the largest state seen.
StateSequence parse_sequence(std::string_view text, const std::optional<AlphabetMap>& alphabet,
                             std::optional<int> states = std::nullopt);
std::string format_sequence(const StateSequence& seq, const std::optional<AlphabetMap>& alphabet);

// Square numeric tables as CSV (commas or whitespace; '#' comments; a header
// row or leading row labels are skipped) or JSON (array of rows, or an object
// holding one under "matrix", "estimate" or "counts").
Eigen::MatrixXd parse_table(std::string_view text);
TransitionMatrix parse_matrix(std::string_view text, Validity mode = Validity::stochastic);
TransitionCounts parse_counts(std::string_view text);

// Equality groups such as "AG=GC,AA=GA" (letter cells under an alphabet) or
// "1,2=3,2;1,1=2,1" (one-based row,col cells; after a complete cell a comma
// or ';' starts a new group). Unlisted cells stay singletons.
EqualityPartition parse_null_hypothesis(std::string_view text, int m,
                                        const std::optional<AlphabetMap>& alphabet);

std::string cell_label(Cell c, const std::optional<AlphabetMap>& alphabet);

// Fixed-decimal table with optional row/column labels.
std::string format_matrix(const Eigen::MatrixXd& M, int decimals,
                          const std::optional<AlphabetMap>& alphabet);
std::string format_counts(const TransitionCounts& counts,
                          const std::optional<AlphabetMap>& alphabet);
std::string matrix_csv(const Eigen::MatrixXd& M);
std::string counts_csv(const TransitionCounts& counts);

nlohmann::json matrix_json(const Eigen::MatrixXd& M);
nlohmann::json counts_json(const TransitionCounts& counts);
nlohmann::json cells_json(const std::vector<Cell>& cells);
nlohmann::json partition_json(const EqualityPartition& partition, bool multi_only);
nlohmann::json lrt_json(const LrtResult& result);
nlohmann::json fit_json(const PenalizedFit& fit, std::string_view method,
                        const std::optional<TransitionMatrix>& refit = std::nullopt);
nlohmann::json cv_json(const CvReport& report);
std::string cv_csv(const CvReport& report);

struct MetricValues {
  double purity = 0.0;
  double frobenius = 0.0;
  double selection_accuracy = 0.0;
};
nlohmann::json metrics_json(const MetricValues& values);

}  // namespace mcfuse

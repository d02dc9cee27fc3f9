#include "mcfuse/io.hpp"

#include "mcfuse/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mcfuse {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view token) {
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ',' || std::isspace(static_cast<unsigned char>(line[pos])))) {
      ++pos;
    }
    std::size_t end = pos;
    while (end < line.size() && line[end] != ',' && !std::isspace(static_cast<unsigned char>(line[end]))) {
      ++end;
    }
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

Eigen::MatrixXd from_rows(const std::vector<std::vector<double>>& rows) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  if (m == 0) throw ParseError("table is empty");
  Eigen::MatrixXd M(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != m) {
      throw ShapeError("table is not square: row " + std::to_string(i + 1) + " has " +
                       std::to_string(row.size()) + " entries, expected " + std::to_string(m));
    }
    for (Eigen::Index j = 0; j < m; ++j) M(i, j) = row[static_cast<std::size_t>(j)];
  }
  return M;
}

Eigen::MatrixXd parse_json_table(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_object()) {
    for (const char* key : {"matrix", "estimate", "counts"}) {
      if (doc.contains(key)) {
        doc = doc[key];
        break;
      }
    }
  }
  if (!doc.is_array()) throw ParseError("JSON table must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const json& row : doc) {
    if (!row.is_array()) throw ParseError("JSON table rows must be arrays");
    std::vector<double> values;
    for (const json& x : row) {
      if (!x.is_number()) throw ParseError("JSON table entries must be numbers");
      values.push_back(x.get<double>());
    }
    rows.push_back(std::move(values));
  }
  return from_rows(rows);
}

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

// Union-find over the m*m cells.
struct CellUnion {
  std::vector<int> parent;
  explicit CellUnion(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  }
  void join(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

AlphabetMap::AlphabetMap(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2) throw ParseError("an alphabet needs at least 2 symbols");
  std::string seen;
  for (char& c : symbols_) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!std::isgraph(static_cast<unsigned char>(c)) || c == '>' || c == ',' || c == '=') {
      throw ParseError(std::string("invalid alphabet symbol '") + c + "'");
    }
    if (seen.find(c) != std::string::npos) {
      throw ParseError(std::string("alphabet symbol '") + c + "' is repeated");
    }
    seen.push_back(c);
  }
}

int AlphabetMap::state_of(char symbol) const {
  const auto c = static_cast<char>(std::toupper(static_cast<unsigned char>(symbol)));
  const auto pos = symbols_.find(c);
  return pos == std::string::npos ? 0 : static_cast<int>(pos) + 1;
}

AlphabetMap load_alphabet(std::string_view spec) {
  if (spec == "ACGT" || spec == "acgt") return AlphabetMap::acgt();
  if (spec.starts_with("file:")) {
    std::string symbols;
    for (char c : read_file(std::string(spec.substr(5)))) {
      if (!std::isspace(static_cast<unsigned char>(c))) symbols.push_back(c);
    }
    return AlphabetMap(symbols);
  }
  throw ParseError("alphabet must be ACGT or file:<path>, got '" + std::string(spec) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  if (!out) throw IoError("failed writing " + path.string());
}

StateSequence parse_sequence(std::string_view text, const std::optional<AlphabetMap>& alphabet,
                             std::optional<int> states) {
  std::vector<int> values;
  if (alphabet) {
    bool header = false;
    bool line_start = true;
    for (char c : text) {
      if (line_start && c == '>') header = true;
      if (c == '\n') {
        header = false;
        line_start = true;
        continue;
      }
      line_start = false;
      if (header || std::isspace(static_cast<unsigned char>(c))) continue;
      const int s = alphabet->state_of(c);
      if (s == 0) throw ParseError(std::string("symbol '") + c + "' is not in the alphabet");
      values.push_back(s);
    }
  } else {
    std::istringstream lines{std::string(text)};
    std::string line;
    while (std::getline(lines, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      for (std::string_view token : split_fields(line)) {
        int s = 0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), s);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size() || s < 1) {
          throw ParseError("invalid state '" + std::string(token) + "'");
        }
        values.push_back(s);
      }
    }
  }
  if (values.empty()) throw ParseError("sequence is empty");
  int m = states.value_or(alphabet ? alphabet->size() : *std::max_element(values.begin(), values.end()));
  if (alphabet && m != alphabet->size()) throw MismatchError("state count differs from the alphabet");
  if (!states && !alphabet) m = std::max(m, 2);
  return StateSequence(std::move(values), m);
}

std::string format_sequence(const StateSequence& seq, const std::optional<AlphabetMap>& alphabet) {
  std::string out;
  for (std::size_t s = 0; s < seq.size(); ++s) {
    if (alphabet) {
      out.push_back(alphabet->symbol_of(seq[s]));
      if ((s + 1) % 60 == 0 || s + 1 == seq.size()) out.push_back('\n');
    } else {
      out += std::to_string(seq[s]);
      out.push_back((s + 1) % 30 == 0 || s + 1 == seq.size() ? '\n' : ' ');
    }
  }
  return out;
}

Eigen::MatrixXd parse_table(std::string_view text) {
  const std::string_view body = trim(text);
  if (body.starts_with('[') || body.starts_with('{')) return parse_json_table(body);

  std::vector<std::vector<double>> rows;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> values;
    bool numeric_seen = false;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto x = to_double(fields[f]);
      if (x) {
        values.push_back(*x);
        numeric_seen = true;
      } else if (f == 0) {
        continue;  // row label
      } else if (numeric_seen) {
        throw ParseError("invalid number '" + std::string(fields[f]) + "'");
      } else {
        values.clear();  // header row
        break;
      }
    }
    if (!values.empty()) rows.push_back(std::move(values));
  }
  return from_rows(rows);
}

TransitionMatrix parse_matrix(std::string_view text, Validity mode) {
  return validate_matrix(parse_table(text), mode);
}

TransitionCounts parse_counts(std::string_view text) {
  const Eigen::MatrixXd table = parse_table(text);
  CountMatrix counts(table.rows(), table.cols());
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double x = table(i, j);
      if (!(x >= 0.0) || x != std::floor(x) || x > 9.0e15) {
        throw ParseError("count (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                         ") is not a nonnegative integer");
      }
      counts(i, j) = static_cast<std::int64_t>(x);
    }
  }
  return TransitionCounts(std::move(counts));
}

EqualityPartition parse_null_hypothesis(std::string_view text, int m,
                                        const std::optional<AlphabetMap>& alphabet) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')') clean.push_back(c);
  }
  if (clean.empty()) throw ParseError("null hypothesis is empty");

  std::vector<std::vector<Cell>> groups(1);
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw ParseError("null hypothesis '" + std::string(text) + "': " + why);
  };
  auto read_int = [&]() {
    std::size_t end = pos;
    while (end < clean.size() && std::isdigit(static_cast<unsigned char>(clean[end]))) ++end;
    if (end == pos) fail("expected a state number at position " + std::to_string(pos + 1));
    const int v = std::stoi(clean.substr(pos, end - pos));
    pos = end;
    return v;
  };
  auto check = [&](int row, int col) {
    if (row < 1 || row > m || col < 1 || col > m) fail("cell outside the " + std::to_string(m) + "-state matrix");
    return Cell{row - 1, col - 1};
  };

  while (true) {
    if (pos >= clean.size()) fail("expected a cell");
    Cell cell;
    if (std::isdigit(static_cast<unsigned char>(clean[pos]))) {
      const int row = read_int();
      if (pos >= clean.size() || clean[pos] != ',') fail("integer cells are written row,col");
      ++pos;
      cell = check(row, read_int());
    } else {
      if (!alphabet) fail("letter cells need an alphabet");
      if (pos + 1 >= clean.size()) fail("letter cells need two symbols");
      const int row = alphabet->state_of(clean[pos]);
      const int col = alphabet->state_of(clean[pos + 1]);
      if (row == 0 || col == 0) fail("unknown symbol in '" + clean.substr(pos, 2) + "'");
      pos += 2;
      cell = check(row, col);
    }
    groups.back().push_back(cell);
    if (pos == clean.size()) break;
    const char sep = clean[pos++];
    if (sep == '=') continue;
    if (sep == ',' || sep == ';') {
      groups.emplace_back();
      continue;
    }
    fail(std::string("unexpected '") + sep + "'");
  }

  CellUnion uf(m * m);
  for (const auto& group : groups) {
    if (group.size() < 2) fail("every group needs at least two cells joined by '='");
    for (std::size_t g = 1; g < group.size(); ++g) {
      uf.join(cell_index(group[0], m), cell_index(group[g], m));
    }
  }
  std::vector<std::vector<Cell>> classes;
  std::vector<int> slot(static_cast<std::size_t>(m * m), -1);
  for (int k = 0; k < m * m; ++k) {
    const int root = uf.find(k);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(cell_at(k, m));
  }
  return EqualityPartition(m, std::move(classes));
}

std::string cell_label(Cell c, const std::optional<AlphabetMap>& alphabet) {
  if (alphabet && c.row < alphabet->size() && c.col < alphabet->size()) {
    return std::string{alphabet->symbol_of(c.row + 1), alphabet->symbol_of(c.col + 1)};
  }
  return "(" + std::to_string(c.row + 1) + "," + std::to_string(c.col + 1) + ")";
}

std::string format_matrix(const Eigen::MatrixXd& M, int decimals,
                          const std::optional<AlphabetMap>& alphabet) {
  const bool labels = alphabet && alphabet->size() == M.rows();
  const int width = decimals + 3;
  std::string out;
  char buf[64];
  if (labels) {
    out += "  ";
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, " %*c", width, alphabet->symbol_of(static_cast<int>(j) + 1));
      out += buf;
    }
    out += '\n';
  }
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (labels) {
      out.push_back(alphabet->symbol_of(static_cast<int>(i) + 1));
      out.push_back(' ');
    }
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%*s", j == 0 && !labels ? "" : " ", width,
                    fixed(M(i, j), decimals).c_str());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string format_counts(const TransitionCounts& counts,
                          const std::optional<AlphabetMap>& alphabet) {
  return format_matrix(counts.matrix().cast<double>(), 0, alphabet);
}

std::string matrix_csv(const Eigen::MatrixXd& M) {
  std::string out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += json(M(i, j)).dump();
    }
    out.push_back('\n');
  }
  return out;
}

std::string counts_csv(const TransitionCounts& counts) {
  std::string out;
  for (int i = 0; i < counts.states(); ++i) {
    for (int j = 0; j < counts.states(); ++j) {
      if (j > 0) out.push_back(',');
      out += std::to_string(counts(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json counts_json(const TransitionCounts& counts) {
  json rows = json::array();
  for (int i = 0; i < counts.states(); ++i) {
    json row = json::array();
    for (int j = 0; j < counts.states(); ++j) row.push_back(counts(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json cells_json(const std::vector<Cell>& cells) {
  json out = json::array();
  for (const Cell& c : cells) out.push_back({c.row + 1, c.col + 1});
  return out;
}

json partition_json(const EqualityPartition& partition, bool multi_only) {
  json out = json::array();
  for (std::size_t c = 0; c < partition.size(); ++c) {
    const auto& cells = partition.classes()[c];
    if (multi_only && cells.size() < 2) continue;
    json entry{{"cells", cells_json(cells)}};
    if (partition.values()) entry["value"] = (*partition.values())[c];
    out.push_back(std::move(entry));
  }
  return out;
}

json lrt_json(const LrtResult& r) {
  return json{
      {"gamma", r.gamma},
      {"df", r.df},
      {"critical", r.critical},
      {"level", r.level},
      {"p_value", r.p_value},
      {"reject", r.reject},
      {"null_fit", matrix_json(r.null_fit.entries())},
      {"alt_fit", matrix_json(r.alt_fit.entries())},
  };
}

json fit_json(const PenalizedFit& fit, std::string_view method,
              const std::optional<TransitionMatrix>& refit) {
  const PairSet pairs = pair_set(fit.estimate.states());
  json active = json::array();
  for (std::size_t t : fit.active_set) {
    active.push_back(cells_json({pairs.first(t), pairs.second(t)}));
  }
  const SolverDiagnostics& d = fit.diagnostics;
  json out{
      {"method", method},
      {"lambda", fit.lambda},
      {"gamma", fit.weights.gamma},
      {"estimate", matrix_json(fit.estimate.entries())},
      {"objective", fit.objective_value},
      {"active_pairs", std::move(active)},
      {"fused_classes", partition_json(fit.fused_partition, true)},
      {"diagnostics",
       {{"iterations", d.iterations},
        {"constraint_violation", d.constraint_violation},
        {"final_mu", d.final_mu},
        {"kkt_residual", d.kkt_residual},
        {"certified", d.certified},
        {"polish_threshold", d.polish_threshold}}},
  };
  if (refit) out["refit"] = matrix_json(refit->entries());
  return out;
}

json cv_json(const CvReport& report) {
  json per_fold = json::array();
  for (Eigen::Index f = 0; f < report.per_fold.rows(); ++f) {
    json row = json::array();
    for (Eigen::Index g = 0; g < report.per_fold.cols(); ++g) row.push_back(report.per_fold(f, g));
    per_fold.push_back(std::move(row));
  }
  return json{
      {"method", method_name(report.method)},
      {"gamma", report.gamma},
      {"k", report.k},
      {"grid", report.grid},
      {"scores", report.scores},
      {"best_lambda", report.best_lambda},
      {"best_score", report.scores[report.best_index]},
      {"per_fold", std::move(per_fold)},
  };
}

std::string cv_csv(const CvReport& report) {
  std::string out = "lambda,cv_score";
  for (int f = 1; f <= report.k; ++f) out += ",fold_" + std::to_string(f);
  out.push_back('\n');
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    out += json(report.grid[g]).dump() + ',' + json(report.scores[g]).dump();
    for (Eigen::Index f = 0; f < report.per_fold.rows(); ++f) {
      out += ',' + json(report.per_fold(f, static_cast<Eigen::Index>(g))).dump();
    }
    out.push_back('\n');
  }
  return out;
}

json metrics_json(const MetricValues& values) {
  return json{
      {"purity", values.purity},
      {"frobenius", values.frobenius},
      {"selection_accuracy", values.selection_accuracy},
  };
}

}  // namespace mcfuse

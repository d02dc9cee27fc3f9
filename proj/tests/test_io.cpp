#include "mcfuse/error.hpp"
#include "mcfuse/io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <unistd.h>

using namespace mcfuse;
using mcfuse::testing::acgt_counts;

namespace {

const std::optional<AlphabetMap> kAcgt = AlphabetMap::acgt();
const std::optional<AlphabetMap> kNoAlphabet;

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mcfuse_io_" + std::to_string(getpid()) + "_" + name);
}

}  // namespace

TEST(Alphabet, LookupAndErrors) {
  const AlphabetMap a = AlphabetMap::acgt();
  EXPECT_EQ(a.size(), 4);
  EXPECT_EQ(a.state_of('G'), 3);
  EXPECT_EQ(a.state_of('g'), 3);
  EXPECT_EQ(a.state_of('N'), 0);
  EXPECT_EQ(a.symbol_of(4), 'T');
  EXPECT_THROW(AlphabetMap("A"), ParseError);
  EXPECT_THROW(AlphabetMap("ABA"), ParseError);
  EXPECT_THROW(load_alphabet("XYZ"), ParseError);
  EXPECT_EQ(load_alphabet("ACGT").symbols(), "ACGT");

  const auto path = scratch("alphabet.txt");
  write_file(path, "x y\nz\n");
  EXPECT_EQ(load_alphabet("file:" + path.string()).symbols(), "XYZ");
  std::filesystem::remove(path);
}

TEST(Sequence, LettersAndFasta) {
  const StateSequence s = parse_sequence(">chr1 test\nACg\nT a\n>second\nCC\n", kAcgt);
  EXPECT_EQ(s.values(), (std::vector<int>{1, 2, 3, 4, 1, 2, 2}));
  EXPECT_EQ(s.states(), 4);
  EXPECT_THROW(parse_sequence("ACGN", kAcgt), ParseError);
  EXPECT_THROW(parse_sequence(">only a header\n", kAcgt), ParseError);
}

TEST(Sequence, Integers) {
  const StateSequence s = parse_sequence("1 2,3\n# comment\n2 1 # trailing\n", kNoAlphabet);
  EXPECT_EQ(s.values(), (std::vector<int>{1, 2, 3, 2, 1}));
  EXPECT_EQ(s.states(), 3);
  EXPECT_EQ(parse_sequence("1 2 1", kNoAlphabet, 5).states(), 5);
  EXPECT_THROW(parse_sequence("1 0 2", kNoAlphabet), ParseError);
  EXPECT_THROW(parse_sequence("1 x", kNoAlphabet), ParseError);
  EXPECT_THROW(parse_sequence("1 2 4", kNoAlphabet, 3), Error);
}

TEST(Sequence, FormatRoundTrip) {
  const StateSequence s = simulate_sequence(TransitionMatrix::uniform(4), 250, 3);
  EXPECT_EQ(parse_sequence(format_sequence(s, kAcgt), kAcgt).values(), s.values());
  EXPECT_EQ(parse_sequence(format_sequence(s, kNoAlphabet), kNoAlphabet, 4).values(), s.values());
  const std::string text = format_sequence(s, kAcgt);
  EXPECT_EQ(text.find('\n'), 60u);
}

TEST(Table, CsvWithLabelsAndComments) {
  const std::string text = "# ACGT transition counts\n,A,C,G,T\nA,896,478,625,927\nC,665,462,218,579\n"
                           "G,645,440,466,531\nT,720,543,774,1030\n";
  EXPECT_EQ(parse_counts(text).matrix(), acgt_counts().matrix());
  EXPECT_EQ(parse_counts(read_file(MCFUSE_TEST_DATA "/acgt_counts.csv")).matrix(),
            acgt_counts().matrix());
}

TEST(Table, JsonForms) {
  EXPECT_EQ(parse_table("[[1, 2], [3, 4]]"), mcfuse::testing::rows({{1, 2}, {3, 4}}));
  EXPECT_EQ(parse_table(R"({"counts": [[1, 2], [3, 4]]})"), mcfuse::testing::rows({{1, 2}, {3, 4}}));
  EXPECT_EQ(parse_table(R"({"estimate": [[0.5, 0.5], [1, 0]]})")(1, 0), 1.0);
  EXPECT_THROW(parse_table("[[1, 2], [3]]"), ShapeError);
  EXPECT_THROW(parse_table("[[1, \"x\"], [3, 4]]"), ParseError);
  EXPECT_THROW(parse_table("{\"other\": 1}"), ParseError);
  EXPECT_THROW(parse_table("[1, 2"), ParseError);
}

TEST(Table, CsvErrors) {
  EXPECT_THROW(parse_table(""), ParseError);
  EXPECT_THROW(parse_table("1,2,3\n4,5,6\n"), ShapeError);
  EXPECT_THROW(parse_table("1,2\n3,oops\n"), ParseError);
  EXPECT_THROW(parse_counts("1,2.5\n3,4\n"), ParseError);
  EXPECT_THROW(parse_counts("1,-2\n3,4\n"), ParseError);
  EXPECT_THROW(parse_matrix("0.5,0.6\n0.5,0.5\n"), RowSumError);
}

TEST(Table, CsvAndJsonRoundTrip) {
  const TransitionMatrix P = mle(acgt_counts());
  EXPECT_EQ(parse_matrix(matrix_csv(P.entries())).entries(), P.entries());
  EXPECT_EQ(parse_matrix(matrix_json(P.entries()).dump()).entries(), P.entries());
  EXPECT_EQ(parse_counts(counts_csv(acgt_counts())).matrix(), acgt_counts().matrix());
  EXPECT_EQ(parse_counts(counts_json(acgt_counts()).dump()).matrix(), acgt_counts().matrix());
}

TEST(NullHypothesis, LetterCells) {
  const EqualityPartition p = parse_null_hypothesis("AG=GC", 4, kAcgt);
  EXPECT_EQ(p.size(), 15u);
  EXPECT_TRUE(p.same_class({0, 2}, {2, 1}));
  const EqualityPartition q = parse_null_hypothesis("(AG = GC), AA=GA; tg=gt", 4, kAcgt);
  EXPECT_EQ(q.size(), 13u);
  EXPECT_TRUE(q.same_class({0, 0}, {2, 0}));
  EXPECT_TRUE(q.same_class({3, 2}, {2, 3}));
  EXPECT_FALSE(q.same_class({0, 0}, {0, 2}));
}

TEST(NullHypothesis, IntegerCellsAndMerging) {
  const EqualityPartition p = parse_null_hypothesis("1,2=3,2;1,1=2,1", 3, kNoAlphabet);
  EXPECT_EQ(p.size(), 7u);
  EXPECT_TRUE(p.same_class({0, 1}, {2, 1}));
  EXPECT_TRUE(p.same_class({0, 0}, {1, 0}));
  // Overlapping groups merge.
  const EqualityPartition q = parse_null_hypothesis("1,1=1,2;1,2=2,2", 2, kNoAlphabet);
  EXPECT_EQ(q.size(), 2u);
  EXPECT_TRUE(q.same_class({0, 0}, {1, 1}));
  EXPECT_EQ(parse_null_hypothesis("1,1=1,2=2,1", 2, kNoAlphabet).size(), 2u);
}

TEST(NullHypothesis, Errors) {
  EXPECT_THROW(parse_null_hypothesis("", 4, kAcgt), ParseError);
  EXPECT_THROW(parse_null_hypothesis("AG", 4, kAcgt), ParseError);
  EXPECT_THROW(parse_null_hypothesis("AG=GX", 4, kAcgt), ParseError);
  EXPECT_THROW(parse_null_hypothesis("AG=GC", 4, kNoAlphabet), ParseError);
  EXPECT_THROW(parse_null_hypothesis("1,2=4,1", 3, kNoAlphabet), ParseError);
  EXPECT_THROW(parse_null_hypothesis("1,2=", 3, kNoAlphabet), ParseError);
  EXPECT_THROW(parse_null_hypothesis("1=2", 3, kNoAlphabet), ParseError);
  EXPECT_THROW(parse_null_hypothesis("AG+GC", 4, kAcgt), ParseError);
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(read_file("/nonexistent/mcfuse/input.csv"), IoError);
  EXPECT_THROW(write_file("/nonexistent/mcfuse/out.csv", "x"), IoError);
  try {
    read_file("/nonexistent/x");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "IoError");
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Format, LabelsAndDecimals) {
  EXPECT_EQ(cell_label({0, 2}, kAcgt), "AG");
  const std::string table = format_matrix(mle(acgt_counts()).entries(), 3, kAcgt);
  EXPECT_NE(table.find("0.306"), std::string::npos);
  EXPECT_NE(table.find('T'), std::string::npos);
  EXPECT_NE(format_counts(acgt_counts(), kAcgt).find("1030"), std::string::npos);
}

TEST(Json, FitAndLrtShapes) {
  const PenalizedFit fit = fit_penalized(acgt_counts(), 0.5, Method::mcalasso);
  const nlohmann::json j = fit_json(fit, "mcalasso", refit(acgt_counts(), fit));
  for (const char* key : {"method", "lambda", "gamma", "estimate", "objective", "active_pairs",
                          "fused_classes", "diagnostics", "refit"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["estimate"].size(), 4u);
  EXPECT_TRUE(j["diagnostics"]["certified"].get<bool>());
  // Cells are one-based in serialized output.
  EXPECT_EQ(cells_json({{0, 2}}).dump(), "[[1,3]]");

  const EqualityPartition null = parse_null_hypothesis("AG=GC", 4, kAcgt);
  const nlohmann::json l = lrt_json(lrt(acgt_counts(), null, 0.05));
  EXPECT_EQ(l["df"].get<int>(), 1);
  EXPECT_FALSE(l["reject"].get<bool>());
}

TEST(Json, CvReportCsv) {
  const StateSequence seq = simulate_sequence(mcfuse::testing::three_state_truth(), 2000, 1);
  const CvReport r = select_lambda(seq, {0.1, 1.0});
  const std::string csv = cv_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,cv_score,fold_1,fold_2,fold_3,fold_4,fold_5");
  const nlohmann::json j = cv_json(r);
  EXPECT_EQ(j["per_fold"].size(), 5u);
  EXPECT_EQ(j["best_lambda"].get<double>(), r.best_lambda);
  EXPECT_EQ(metrics_json({1.0, 0.5, 0.25})["frobenius"].get<double>(), 0.5);
}

#include "hdmer/corpus.hpp"

#include <gtest/gtest.h>

#include <cctype>
#include <sstream>

#include "hdmer/latex.hpp"
#include "hdmer/rng.hpp"

using namespace hdmer;

namespace {

std::string record_line(const std::string& id, const std::string& domain, const std::string& latex) {
  return R"({"id":")" + id + R"(","domain":")" + domain + R"(","latex":")" + latex +
         R"(","labels":[")" + latex + R"("],"display_mode":"inline"})";
}

}  // namespace

TEST(LoadCorpus, WellFormed) {
  std::stringstream in;
  in << record_line("r1", "math", "a^2") << '\n'
     << record_line("r2", "cs", "x+y") << '\n'
     << record_line("r3", "q-fin", "\\\\frac{1}{2}") << '\n';
  const LoadResult result = read_corpus(in);
  EXPECT_EQ(result.records.size(), 3u);
  EXPECT_TRUE(result.diagnostics.empty());
  EXPECT_EQ(result.records[2].latex, "\\frac{1}{2}");
  EXPECT_EQ(result.records[2].domain, Domain::QFin);
}

TEST(LoadCorpus, MissingLabelsIsReportedAndOthersLoad) {
  std::stringstream in;
  in << record_line("r1", "math", "a") << '\n'
     << R"({"id":"r2","domain":"math","latex":"b","display_mode":"inline"})" << '\n'
     << record_line("r3", "math", "c") << '\n';
  const LoadResult result = read_corpus(in);
  ASSERT_EQ(result.records.size(), 2u);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].line, 2u);
  EXPECT_EQ(result.diagnostics[0].field, "labels");
}

TEST(LoadCorpus, DuplicateId) {
  std::stringstream in;
  in << record_line("r1", "math", "a") << '\n' << record_line("r1", "stat", "b") << '\n';
  const LoadResult result = read_corpus(in);
  ASSERT_EQ(result.records.size(), 1u);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].field, "id");
  EXPECT_NE(result.diagnostics[0].message.find("duplicate"), std::string::npos);
}

TEST(LoadCorpus, SchemaViolations) {
  std::stringstream in;
  in << "not json\n"
     << record_line("r1", "biology", "a") << '\n'
     << record_line("r2", "math", "{a") << '\n'
     << R"({"id":"r3","domain":"math","latex":"a","labels":[],"display_mode":"inline"})" << '\n'
     << R"({"id":"r4","domain":"math","latex":"a","labels":["a"],"display_mode":"wide"})" << '\n';
  const LoadResult result = read_corpus(in);
  EXPECT_TRUE(result.records.empty());
  ASSERT_EQ(result.diagnostics.size(), 5u);
  EXPECT_EQ(result.diagnostics[1].field, "domain");
  EXPECT_EQ(result.diagnostics[2].field, "latex");
  EXPECT_EQ(result.diagnostics[3].field, "labels");
  EXPECT_EQ(result.diagnostics[4].field, "display_mode");
}

TEST(LoadCorpus, MissingFileThrows) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), CorpusIoError);
}

TEST(LoadCorpus, SaveLoadIsByteStable) {
  SynthCorpusSpec spec;
  spec.count = 50;
  spec.max_level = 4;
  spec.max_lines = 6;
  spec.rng_seed = 3;
  const auto records = synth_corpus(spec);
  std::stringstream first;
  write_corpus(first, records);
  const LoadResult loaded = read_corpus(first);
  ASSERT_TRUE(loaded.diagnostics.empty());
  EXPECT_EQ(loaded.records, records);
  std::stringstream second;
  write_corpus(second, loaded.records);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Bins, Boundaries) {
  EXPECT_FALSE(level_group(0));
  EXPECT_EQ(level_group(2), LevelGroup::L1to2);
  EXPECT_EQ(level_group(3), LevelGroup::L3to5);
  EXPECT_EQ(level_group(7), LevelGroup::L6to7);
  EXPECT_FALSE(level_group(8));
  EXPECT_EQ(line_bin(3), LineBin::A);
  EXPECT_EQ(line_bin(4), LineBin::B);
  EXPECT_EQ(line_bin(20), LineBin::C);
  EXPECT_EQ(line_bin(51), LineBin::D);
  EXPECT_FALSE(line_bin(52));
  EXPECT_FALSE(line_bin(0));
}

TEST(StatTable, KnownCells) {
  SynthSpec spec;
  spec.target_level = 4;
  spec.target_lines = 5;
  spec.rng_seed = 11;
  CorpusRecord deep{"deep", Domain::Math, synth_formula(spec), {}, DisplayMode::Display};
  CorpusRecord flat{"flat", Domain::Cs, "a+b", {}, DisplayMode::Inline};
  CorpusRecord atom{"atom", Domain::Cs, "a", {}, DisplayMode::Inline};
  const StatTable table = stat_table({deep, flat, atom});
  EXPECT_EQ(table.at(LevelGroup::L3to5, LineBin::B, Domain::Math), 1);
  EXPECT_EQ(table.at(LevelGroup::L1to2, LineBin::A, Domain::Cs), 1);
  EXPECT_EQ(table.total(), 2);
  EXPECT_EQ(table.overflow, 1);
  ASSERT_EQ(table.overflow_ids.size(), 1u);
  EXPECT_EQ(table.overflow_ids[0], "atom");
}

TEST(StatTable, CsvRoundTripAndGrid) {
  SynthCorpusSpec spec;
  spec.count = 300;
  spec.min_level = 1;
  spec.max_level = 7;
  spec.max_lines = 30;
  spec.rng_seed = 5;
  const StatTable table = stat_table(synth_corpus(spec));
  EXPECT_EQ(table.total(), 300);
  std::stringstream csv;
  write_stat_csv(csv, table);
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 1 + 3 * 4 * 8);
  csv.clear();
  csv.seekg(0);
  EXPECT_EQ(read_stat_csv(csv), table);

  const std::string grid = format_stat_grid(table);
  EXPECT_NE(grid.find("q-bio"), std::string::npos);
  EXPECT_NE(grid.find("[6-7]"), std::string::npos);
}

TEST(StatTable, RejectsMalformedCsv) {
  std::stringstream bad("level_group,line_bin,domain,count\n[1-2],Z,math,3\n");
  EXPECT_THROW(read_stat_csv(bad), CorpusIoError);
  std::stringstream header("wrong\n");
  EXPECT_THROW(read_stat_csv(header), CorpusIoError);
}

TEST(Synth, LevelZeroIsSingleLetter) {
  SynthSpec spec;
  spec.target_level = 0;
  spec.rng_seed = 9;
  const std::string f = synth_formula(spec);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(std::isalpha(static_cast<unsigned char>(f[0])));
}

TEST(Synth, LevelTwoTwoLines) {
  SynthSpec spec;
  spec.target_level = 2;
  spec.target_lines = 2;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.rng_seed = seed;
    const FormulaAst ast = parse(synth_formula(spec));
    EXPECT_EQ(ast.level, 2);
    EXPECT_EQ(ast.line_count, 2);
  }
}

TEST(Synth, InfeasibleSpecs) {
  SynthSpec spec;
  spec.target_level = 0;
  spec.target_lines = 3;
  EXPECT_THROW(synth_formula(spec), InfeasibleSpec);
  spec.target_level = 8;
  spec.target_lines = 1;
  EXPECT_THROW(synth_formula(spec), InfeasibleSpec);
  spec.target_level = 7;
  spec.max_chars = 3;
  EXPECT_THROW(synth_formula(spec), InfeasibleSpec);
}

TEST(Synth, Deterministic) {
  SynthSpec spec;
  spec.target_level = 5;
  spec.target_lines = 7;
  spec.rng_seed = 1234;
  EXPECT_EQ(synth_formula(spec), synth_formula(spec));
}

TEST(Synth, RespectsMaxChars) {
  SynthSpec spec;
  spec.target_level = 6;
  spec.target_lines = 4;
  spec.max_chars = 30;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    spec.rng_seed = seed;
    EXPECT_LE(parse(synth_formula(spec)).char_count, 30);
  }
}

TEST(Synth, GeneratorAnalyzerClosure) {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    SynthSpec spec;
    spec.target_level = uniform_int(rng, 0, 7);
    spec.target_lines = spec.target_level == 0 ? 1 : uniform_int(rng, 1, 51);
    spec.rng_seed = rng();
    spec.loose_surface = (i % 2) == 0;
    const std::string f = synth_formula(spec);
    const FormulaAst ast = parse(f);
    ASSERT_EQ(ast.level, spec.target_level) << f;
    ASSERT_EQ(ast.line_count, spec.target_lines) << f;
    ASSERT_FALSE(ast.dangling_script) << f;
  }
}

#include "hdmer/latex.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace hdmer;

namespace {

std::vector<std::pair<TokenKind, std::string>> kinds_and_names(const std::string& src) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const Token& t : tokenize(src)) {
    out.emplace_back(t.kind, t.name.empty() ? t.text : t.name);
  }
  return out;
}

Node atom(const std::string& s) { return Atom{s, AtomRole::Symbol}; }

Sequence seq(std::vector<Node> children) { return Sequence{std::move(children)}; }

}  // namespace

TEST(Tokenize, Superscript) {
  using K = TokenKind;
  std::vector<std::pair<K, std::string>> expected = {
      {K::Letter, "a"}, {K::Superscript, "^"}, {K::Digit, "2"}};
  EXPECT_EQ(kinds_and_names("a^2"), expected);
}

TEST(Tokenize, Frac) {
  using K = TokenKind;
  std::vector<std::pair<K, std::string>> expected = {
      {K::Command, "frac"}, {K::OpenGroup, "{"}, {K::Digit, "1"},     {K::CloseGroup, "}"},
      {K::OpenGroup, "{"},  {K::Digit, "2"},     {K::CloseGroup, "}"}};
  EXPECT_EQ(kinds_and_names("\\frac{1}{2}"), expected);
}

TEST(Tokenize, Matrix) {
  using K = TokenKind;
  std::vector<std::pair<K, std::string>> expected = {
      {K::EnvBegin, "matrix"}, {K::Letter, "a"}, {K::Ampersand, "&"}, {K::Letter, "b"},
      {K::RowBreak, "\\\\"},   {K::Letter, "c"}, {K::Ampersand, "&"}, {K::Letter, "d"},
      {K::EnvEnd, "matrix"}};
  EXPECT_EQ(kinds_and_names("\\begin{matrix}a&b\\\\c&d\\end{matrix}"), expected);
}

TEST(Tokenize, UnknownCommandsAndControlSymbols) {
  const auto toks = tokenize("\\foo\\,\\{");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].name, "foo");
  EXPECT_EQ(toks[1].name, ",");
  EXPECT_EQ(toks[2].name, "{");
  for (const Token& t : toks) EXPECT_EQ(t.kind, TokenKind::Command);
}

TEST(Tokenize, Errors) {
  try {
    tokenize("a\\");
    FAIL() << "expected IncompleteEscape";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::IncompleteEscape);
    EXPECT_EQ(e.position(), 1u);
  }
  EXPECT_THROW(tokenize("\\begin{matrix"), ParseError);
  EXPECT_THROW(tokenize("\\begin x"), ParseError);
  EXPECT_THROW(tokenize("\\end{}"), ParseError);
}

TEST(Tokenize, LosslessOnRandomInput) {
  const std::string alphabet = "ab1+ {}^_&\\\xCE\xB1";  // includes a two-byte alpha
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) {
      const std::size_t k = rng() % (alphabet.size() - 1);
      if (alphabet[k] == '\xCE') {
        s += "\xCE\xB1";
      } else if (alphabet[k] != '\xB1') {
        s.push_back(alphabet[k]);
      }
    }
    TokenStream toks;
    try {
      toks = tokenize(s);
    } catch (const ParseError&) {
      continue;
    }
    std::string joined;
    std::size_t expected_pos = 0;
    for (const Token& t : toks) {
      EXPECT_EQ(t.position, expected_pos);
      expected_pos += t.text.size();
      joined += t.text;
    }
    EXPECT_EQ(joined, s);
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Parse, SumOfSquares) {
  const FormulaAst ast = parse("a^2+b^2");
  Script a{Box<Node>(atom("a")), std::nullopt, seq({atom("2")})};
  Script b{Box<Node>(atom("b")), std::nullopt, seq({atom("2")})};
  EXPECT_EQ(ast.root, seq({a, atom("+"), b}));
}

TEST(Parse, SingleGroup) {
  EXPECT_EQ(parse("{x}").root, seq({Group{{atom("x")}}}));
}

TEST(Parse, Errors) {
  try {
    parse("\\begin{matrix}a\\end{pmatrix}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::MismatchedEnvironment);
  }
  try {
    parse("{a");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::UnbalancedBraces);
    EXPECT_EQ(e.position(), 0u);
  }
  try {
    parse("a}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::UnbalancedBraces);
    EXPECT_EQ(e.position(), 1u);
  }
  EXPECT_THROW(parse("\\begin{matrix}a"), ParseError);
  EXPECT_THROW(parse("a\\end{matrix}"), ParseError);
}

TEST(Parse, DanglingScriptRecovers) {
  const FormulaAst ast = parse("^2");
  EXPECT_TRUE(ast.dangling_script);
  ASSERT_EQ(ast.root.children.size(), 1u);
  const auto& script = std::get<Script>(ast.root.children[0].value);
  EXPECT_EQ(*script.base, atom(""));
  EXPECT_FALSE(parse("a^2").dangling_script);
}

TEST(Parse, FracWithoutBraces) {
  EXPECT_EQ(parse("\\frac12").root, parse("\\frac{1}{2}").root);
}

TEST(Parse, RadicalDegree) {
  const FormulaAst ast = parse("\\sqrt[3]{x}");
  const auto& rad = std::get<Radical>(ast.root.children.at(0).value);
  ASSERT_TRUE(rad.degree.has_value());
  EXPECT_EQ(*rad.degree, seq({atom("3")}));
  EXPECT_EQ(serialize(ast), "\\sqrt[3]{x}");
}

TEST(Parse, EnvironmentShape) {
  const FormulaAst ast = parse("\\begin{matrix}a&b\\\\c&d\\end{matrix}");
  const auto& env = std::get<Environment>(ast.root.children.at(0).value);
  ASSERT_EQ(env.rows.size(), 2u);
  EXPECT_EQ(env.rows[0].size(), 2u);
  EXPECT_EQ(env.rows[1][1], seq({atom("d")}));
}

TEST(Parse, GreedyCommandArguments) {
  const FormulaAst unknown = parse("\\foo{d}{x}");
  const auto& cmd = std::get<Command>(unknown.root.children.at(0).value);
  EXPECT_EQ(cmd.name, "foo");
  EXPECT_EQ(cmd.args.size(), 2u);

  // Known commands take their usual arity.
  const FormulaAst mathrm = parse("\\mathrm{d}{x}");
  ASSERT_EQ(mathrm.root.children.size(), 2u);
  EXPECT_EQ(std::get<Command>(mathrm.root.children[0].value).args.size(), 1u);
  const FormulaAst cdot = parse("\\cdot{x}");
  ASSERT_EQ(cdot.root.children.size(), 2u);
  EXPECT_TRUE(std::get<Command>(cdot.root.children[0].value).args.empty());
}

TEST(Serialize, CanonicalForms) {
  EXPECT_EQ(serialize(parse("a^2")), "a^{2}");
  EXPECT_EQ(serialize(parse("a ^ 2")), "a^{2}");
  EXPECT_EQ(serialize(parse("")), "");
  EXPECT_EQ(serialize(parse("x_i^2")), "x_{i}^{2}");
  EXPECT_EQ(serialize(parse("\\alpha b")), "\\alpha b");
  EXPECT_EQ(serialize(parse("\\alpha  2")), "\\alpha2");
  EXPECT_EQ(serialize(parse("x=1 \\\\ y=2")), "x=1\\\\y=2");
  EXPECT_EQ(serialize(parse("\\left( x \\right)")), "\\left(x\\right)");
}

TEST(Serialize, RoundTripFixtures) {
  const std::vector<std::string> fixtures = {
      "a^2+b^2", "\\frac{a^2+b^2}{c}", "\\begin{matrix}a&b\\\\c&d\\end{matrix}",
      "\\sqrt[n]{x+1}", "a^2^3", "x_{i_j}", "\\left\\{ x \\right.", "{\\rm d}x",
      "\\begin{array}{cc}1&2\\end{array}", "^2", "\\begin{cases}x&y\\\\\\end{cases}",
      "\\alpha\\beta", "\\, \\quad x", "\\frac\\alpha2"};
  for (const std::string& f : fixtures) {
    const FormulaAst first = parse(f);
    const FormulaAst second = parse(serialize(first));
    EXPECT_EQ(first.root, second.root) << f << " -> " << serialize(first);
    EXPECT_EQ(first.char_count, second.char_count) << f;
    EXPECT_EQ(first.line_count, second.line_count) << f;
    EXPECT_EQ(serialize(first), serialize(second)) << f;
  }
}

// Hand-labelled levels under the level recurrence: atoms are 0, compound
// sequences at least 1, constructors one above their deepest child and
// environments at least 2.
TEST(Level, HandLabelledFixture) {
  const std::vector<std::pair<std::string, int>> fixture = {
      {"a", 0},
      {"7", 0},
      {"\\alpha", 0},
      {"", 0},
      {"a^2+b^2", 1},
      {"x_i", 1},
      {"a+b", 1},
      {"\\frac{1}{2}", 1},
      {"\\sqrt{x}", 1},
      {"\\mathrm{d}", 1},
      {"\\begin{matrix}a&b\\\\c&d\\end{matrix}", 2},
      {"\\frac{a^2+b^2}{c}", 2},
      {"a^{n+1}", 2},
      {"e^{x^2}", 2},
      {"\\frac{\\sqrt{x+1}}{2}", 3},
      {"\\begin{matrix}a^{n+1}&b\\end{matrix}", 3},
      {"e^{x^{n+1}}", 3},
      {"a_{b_{c_{d_{e}}}}", 4},
      {"\\frac{1}{\\begin{matrix}a^{n+1}\\end{matrix}}", 4},
      {"\\begin{matrix}\\sqrt{\\frac{\\sqrt{x+1}}{2}}\\end{matrix}", 5},
      {"a_{b_{c_{d_{e_{f}}}}}", 5},
      {"a_{b_{c_{d_{e_{f_{g}}}}}}", 6},
      {"\\frac{\\begin{matrix}\\sqrt{\\frac{\\sqrt{x+1}}{2}}\\end{matrix}}{y}", 6},
      {"\\sqrt{\\frac{\\begin{matrix}\\sqrt{\\frac{\\sqrt{x+1}}{2}}\\end{matrix}}{y}}", 7},
      {"a_{b_{c_{d_{e_{f_{g_{h}}}}}}}", 7},
  };
  for (const auto& [src, level] : fixture) {
    const FormulaAst ast = parse(src);
    EXPECT_EQ(ast.level, level) << src;
    EXPECT_EQ(hierarchical_level(ast.root), ast.level) << src;
  }
}

TEST(Level, MatrixWrappingIsMonotone) {
  const std::vector<std::string> fs = {"a", "a+b", "\\frac{a^2+b^2}{c}", "x\\\\y",
                                       "a_{b_{c}}", "\\begin{matrix}a\\end{matrix}"};
  for (const std::string& f : fs) {
    const int inner = parse(f).level;
    const int wrapped = parse("\\begin{matrix}" + f + "\\end{matrix}").level;
    EXPECT_GE(wrapped, std::max(2, inner)) << f;
  }
}

TEST(CharCount, Examples) {
  EXPECT_EQ(parse("a^2+b^2").char_count, 5);
  EXPECT_EQ(parse("").char_count, 0);
  EXPECT_EQ(parse("\\frac{1}{2}").char_count, 3);
  EXPECT_EQ(parse("\\frac{a^2+b^2}{c}").char_count, 7);
  EXPECT_EQ(parse("\\begin{matrix}a&b\\\\c&d\\end{matrix}").char_count, 5);
  EXPECT_EQ(parse("\\mathrm{dx}").char_count, 3);
}

TEST(LineCount, Examples) {
  EXPECT_EQ(parse("a+b").line_count, 1);
  EXPECT_EQ(parse("\\begin{matrix}a\\\\b\\\\c\\end{matrix}").line_count, 3);
  EXPECT_EQ(parse("x=1\\\\y=2").line_count, 2);
  EXPECT_EQ(parse("\\begin{matrix}a\\\\\\begin{matrix}b\\\\c\\end{matrix}\\end{matrix}").line_count,
            3);
}

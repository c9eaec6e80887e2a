#include "hdmer/subformula.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "hdmer/corpus.hpp"
#include "hdmer/rng.hpp"
#include "json.hpp"

using namespace hdmer;

namespace {

std::vector<std::string> latex_of(const std::vector<SubFormula>& subs) {
  std::vector<std::string> out;
  for (const auto& s : subs) out.push_back(s.latex);
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Walks a node path by hand and returns what re-parsing the sub-formula's
// latex should produce.
Sequence expected_subtree(const FormulaAst& ast, const SubFormula& sub) {
  if (sub.span) {
    Sequence run;
    for (std::size_t i = sub.span->first; i < sub.span->second; ++i) {
      run.children.push_back(ast.root.children[i]);
    }
    return run;
  }
  const auto& path = sub.node_path;
  const Sequence* seq = &ast.root;
  const Node* node = nullptr;
  std::size_t k = 0;
  while (k < path.size()) {
    if (seq != nullptr) {
      node = &seq->children.at(path[k++]);
      seq = nullptr;
      continue;
    }
    const std::size_t idx = path[k++];
    if (const auto* g = std::get_if<Group>(&node->value)) {
      node = &g->children.at(idx);
    } else if (const auto* s = std::get_if<Script>(&node->value)) {
      if (idx == 0) node = &*s->base;
      else seq = idx == 1 ? &*s->sub : &*s->sup;
    } else if (const auto* f = std::get_if<Frac>(&node->value)) {
      seq = idx == 0 ? &f->numerator : &f->denominator;
    } else if (const auto* r = std::get_if<Radical>(&node->value)) {
      seq = idx == 0 ? &*r->degree : &r->radicand;
    } else if (const auto* c = std::get_if<Command>(&node->value)) {
      seq = &c->args.at(idx);
    } else if (const auto* e = std::get_if<Environment>(&node->value)) {
      if (k == path.size()) {
        return Sequence{{Node{Environment{e->name, e->args, {e->rows.at(idx)}}}}};
      }
      seq = &e->rows.at(idx).at(path[k++]);
    } else {
      ADD_FAILURE() << "path walks into a leaf";
      return {};
    }
  }
  if (seq != nullptr) return *seq;
  return Sequence{{*node}};
}

std::vector<std::string> synth_sample(std::size_t count, std::uint64_t seed, int max_level = 5,
                                      int max_lines = 6) {
  SynthCorpusSpec spec;
  spec.count = count;
  spec.min_level = 1;
  spec.max_level = max_level;
  spec.max_lines = max_lines;
  spec.max_chars = 120;
  spec.rng_seed = seed;
  std::vector<std::string> out;
  for (const auto& r : synth_corpus(spec)) out.push_back(r.latex);
  return out;
}

}  // namespace

TEST(Enumerate, FractionArguments) {
  const auto subs = latex_of(enumerate_subformulas(parse("\\frac{a^2+b^2}{c}"), 1));
  EXPECT_TRUE(contains(subs, "a^{2}+b^{2}"));
  EXPECT_TRUE(contains(subs, "c"));
  EXPECT_TRUE(contains(subs, "a"));  // script base
}

TEST(Enumerate, NothingMeetsThreshold) {
  EXPECT_TRUE(enumerate_subformulas(parse("a"), 2).empty());
}

TEST(Enumerate, MatrixCellsAndRows) {
  const auto subs = enumerate_subformulas(parse("\\begin{matrix}a&b\\\\c&d\\end{matrix}"), 1);
  int cells = 0, rows = 0;
  for (const auto& s : subs) {
    if (s.node_path.size() == 3) ++cells;
    if (s.node_path.size() == 2) ++rows;
  }
  EXPECT_EQ(cells, 4);
  EXPECT_EQ(rows, 2);
  const auto names = latex_of(subs);
  EXPECT_TRUE(contains(names, "\\begin{matrix}a&b\\end{matrix}"));
  EXPECT_TRUE(contains(names, "d"));
}

TEST(Enumerate, RootRunsSplitAtOperators) {
  const FormulaAst ast = parse("x^2+\\frac{1}{y}=z\\cdot w");
  std::vector<std::string> runs;
  for (const auto& s : enumerate_subformulas(ast, 1)) {
    if (s.span) runs.push_back(s.latex);
  }
  EXPECT_EQ(runs, (std::vector<std::string>{"x^{2}", "\\frac{1}{y}", "z", "w"}));
}

TEST(Enumerate, FencesAreNotSplit) {
  const FormulaAst ast = parse("\\left(a+b\\right)c-d");
  std::vector<std::string> runs;
  for (const auto& s : enumerate_subformulas(ast, 1)) {
    if (s.span) runs.push_back(s.latex);
  }
  EXPECT_EQ(runs, (std::vector<std::string>{"\\left(a+b\\right)c", "d"}));
}

TEST(Enumerate, WellFormedAndStructurallyEqual) {
  for (const std::string& f : synth_sample(300, 17)) {
    const FormulaAst ast = parse(f);
    const auto subs = enumerate_subformulas(ast, 1);
    std::set<std::pair<std::vector<std::size_t>, std::optional<std::pair<std::size_t, std::size_t>>>>
        keys;
    for (const SubFormula& s : subs) {
      ASSERT_TRUE(keys.emplace(s.node_path, s.span).second) << "duplicate in " << f;
      const FormulaAst back = parse(s.latex);
      ASSERT_EQ(back.char_count, s.char_count) << s.latex;
      ASSERT_GE(s.char_count, 1);
      ASSERT_EQ(back.root, expected_subtree(ast, s)) << f << " -> " << s.latex;
    }
  }
}

TEST(Sample, CoverageMatchesBruteForceFeasibility) {
  int checked = 0;
  for (const std::string& f : synth_sample(400, 23, 4, 3)) {
    const FormulaAst ast = parse(f);
    const int c = ast.char_count;
    std::vector<int> sizes;
    for (const auto& s : enumerate_subformulas(ast, 1)) {
      if (s.char_count < c) sizes.push_back(s.char_count);
    }
    if (sizes.size() > 24) continue;
    for (int n : {1, 2, 4}) {
      const double theta = 0.7;
      // Exhaustive subset search for any selection of at most n candidates.
      bool feasible = false;
      std::function<void(std::size_t, int, int)> search = [&](std::size_t from, int k, int sum) {
        if (feasible) return;
        if (10 * sum >= 7 * c && k > 0) {
          feasible = true;
          return;
        }
        if (k == n) return;
        for (std::size_t i = from; i < sizes.size(); ++i) search(i + 1, k + 1, sum + sizes[i]);
      };
      search(0, 0, 0);

      const SampleResult r = sample_subformulas(ast, n, theta, derive_seed(5, f));
      EXPECT_EQ(r.coverage_fallback, !feasible) << f << " n=" << n;
      EXPECT_LE(r.parts.size(), static_cast<std::size_t>(n));
      if (!r.coverage_fallback) {
        int sum = 0;
        for (const auto& p : r.parts) sum += parse(p.latex).char_count;
        EXPECT_GE(10 * sum, 7 * c) << f;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 600);
}

TEST(Sample, SmallExample) {
  // c = 7 here (the fraction head plus six visible symbols), so the target is 5.
  const FormulaAst ast = parse("\\frac{a^2+b^2}{c}");
  ASSERT_EQ(ast.char_count, 7);
  EXPECT_EQ(coverage_target(7, 0.7), 5);
  const SampleResult r = sample_subformulas(ast, 2, 0.7, 1);
  ASSERT_FALSE(r.coverage_fallback);
  int sum = 0;
  for (const auto& p : r.parts) sum += p.char_count;
  EXPECT_GE(sum, 5);
}

TEST(Sample, FullCoverageWithOnePartFallsBack) {
  for (const char* f : {"a+b", "\\frac{a}{b}", "x^{2}", "\\sqrt{y}-1"}) {
    const SampleResult r = sample_subformulas(parse(f), 1, 1.0, 3);
    EXPECT_TRUE(r.coverage_fallback) << f;
    ASSERT_EQ(r.parts.size(), 1u);
    EXPECT_EQ(r.parts[0].latex, f);
  }
}

TEST(Sample, CoverageTargetIsExactOnIntegers) {
  EXPECT_EQ(coverage_target(10, 0.7), 7);
  EXPECT_EQ(coverage_target(11, 0.7), 8);
  EXPECT_EQ(coverage_target(20, 0.7), 14);
  EXPECT_EQ(coverage_target(3, 1.0), 3);
}

TEST(Sample, Deterministic) {
  const FormulaAst ast = parse("a+\\frac{b}{c}+\\sqrt{d+e}-f^{g}");
  const auto a = sample_subformulas(ast, 3, 0.7, 42);
  const auto b = sample_subformulas(ast, 3, 0.7, 42);
  ASSERT_EQ(a.parts, b.parts);
  EXPECT_EQ(a.coverage_fallback, b.coverage_fallback);
}

TEST(Sample, RejectsBadArguments) {
  const FormulaAst ast = parse("a+b");
  EXPECT_THROW(sample_subformulas(ast, 0, 0.7, 1), std::invalid_argument);
  EXPECT_THROW(sample_subformulas(ast, 2, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_subformulas(ast, 2, 1.5, 1), std::invalid_argument);
}

TEST(Crop, GroupIsAbsorbedWhole) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CropSpec c = random_crop(parse("{a}"), seed);
    EXPECT_EQ(c.latex, "{a}");
    EXPECT_EQ(c.token_start, 0u);
    EXPECT_EQ(c.token_end, 3u);
    EXPECT_DOUBLE_EQ(c.fraction, 1.0);
  }
}

TEST(Crop, EdgesAreNotOperators) {
  const FormulaAst ast = parse("a+b+c+d");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const CropSpec c = random_crop(ast, seed);
    ASSERT_FALSE(c.latex.empty());
    EXPECT_NE(c.latex.front(), '+');
    EXPECT_NE(c.latex.back(), '+');
    EXPECT_NE(std::string("a+b+c+d").find(c.latex), std::string::npos);
    EXPECT_LT(c.token_start, c.token_end);
    // 4..7 of the 7 tokens are drawn; an alternating window loses at most
    // one operator at its edges.
    EXPECT_GE(c.token_end - c.token_start, 3u);
    EXPECT_LE(c.token_end - c.token_start, 7u);
  }
}

TEST(Crop, TooShort) {
  EXPECT_THROW(random_crop(parse("a"), 1), TooShort);
  EXPECT_THROW(random_crop(parse(""), 1), TooShort);
}

TEST(Crop, WindowsAreBalancedAndDeterministic) {
  for (const std::string& f : synth_sample(300, 29)) {
    const FormulaAst ast = parse(f);
    if (tokenize_significant(f).size() < 2) continue;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const CropSpec c = random_crop(ast, seed);
      ASSERT_EQ(c, random_crop(ast, seed));
      ASSERT_LT(c.token_start, c.token_end);
      ASSERT_NO_THROW(parse(c.latex)) << f << " -> " << c.latex;
      const auto toks = tokenize_significant(f);
      ASSERT_EQ(tokenize_significant(c.latex).size(), c.token_end - c.token_start);
      ASSERT_EQ(c.latex.substr(0, toks[c.token_start].text.size()), toks[c.token_start].text);
    }
  }
}

TEST(Instance, NoCropHasNoParts) {
  SamplePlan plan;
  plan.mode = CropMode::NoCrop;
  const auto inst = make_training_instance(parse("a+b"), plan);
  EXPECT_TRUE(inst.parts.empty());
  const auto m = emit_render_manifest(inst, "r1");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].role, "main");
}

TEST(Instance, HybridWithZeroLambdaIsSubFormulaCrop) {
  SamplePlan plan;
  plan.mode = CropMode::Hybrid;
  plan.lambda_percent = 0.0;
  const FormulaAst ast = parse("a+\\frac{b}{c}+d^{2}");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    plan.rng_seed = seed;
    const auto hybrid = make_training_instance(ast, plan);
    EXPECT_EQ(hybrid.part_kind, PartKind::SubFormulaCrop);
    SamplePlan full = plan;
    full.mode = CropMode::FullSubFormulaCrop;
    const auto sub = make_training_instance(ast, full);
    ASSERT_EQ(hybrid.parts.size(), sub.parts.size());
    for (std::size_t i = 0; i < sub.parts.size(); ++i) {
      EXPECT_EQ(part_latex(hybrid.parts[i]), part_latex(sub.parts[i]));
    }
  }
}

TEST(Instance, HybridFrequency) {
  SamplePlan plan;
  plan.mode = CropMode::Hybrid;
  plan.lambda_percent = 0.3;
  const FormulaAst ast = parse("a+b");
  int random = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    plan.rng_seed = derive_seed(2024, static_cast<std::uint64_t>(i));
    if (make_training_instance(ast, plan).part_kind == PartKind::RandomCrop) ++random;
  }
  EXPECT_NEAR(static_cast<double>(random) / trials, 0.3, 0.02);
}

TEST(Instance, LabelsFollowPartKind) {
  SamplePlan plan;
  const FormulaAst ast = parse("x+\\sqrt{y+1}-\\frac{2}{z}");
  plan.mode = CropMode::FullRandomCrop;
  auto inst = make_training_instance(ast, plan);
  EXPECT_EQ(inst.part_kind, PartKind::RandomCrop);
  EXPECT_EQ(inst.parts.size(), 4u);
  EXPECT_EQ(inst.labels_available, std::vector<bool>(4, false));

  plan.mode = CropMode::FullSubFormulaCrop;
  inst = make_training_instance(ast, plan);
  EXPECT_EQ(inst.part_kind, PartKind::SubFormulaCrop);
  EXPECT_EQ(inst.labels_available, std::vector<bool>(inst.parts.size(), true));
}

TEST(Instance, SingleTokenRandomCropIsWholeFormula) {
  SamplePlan plan;
  plan.mode = CropMode::FullRandomCrop;
  auto inst = make_training_instance(parse("x"), plan);
  ASSERT_EQ(inst.parts.size(), 1u);
  EXPECT_EQ(part_latex(inst.parts[0]), "x");
  inst = make_training_instance(parse(""), plan);
  EXPECT_TRUE(inst.parts.empty());
}

TEST(Instance, PlanValidation) {
  SamplePlan plan;
  plan.n = 0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = {};
  plan.coverage_theta = 0.0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = {};
  plan.lambda_percent = 1.2;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  EXPECT_EQ(parse_crop_mode("full-subformula-crop"), CropMode::FullSubFormulaCrop);
  EXPECT_FALSE(parse_crop_mode("sideways"));
}

TEST(Manifest, EntriesAndJson) {
  SamplePlan plan;
  plan.mode = CropMode::FullSubFormulaCrop;
  plan.n = 4;
  plan.coverage_theta = 0.3;
  const FormulaAst ast = parse("a+\\frac{b}{c}+\\sqrt{d}+e^{f}+g");
  const auto inst = make_training_instance(ast, plan);
  const auto m = emit_render_manifest(inst, "rec-7");
  EXPECT_EQ(m.entries.size(), 1 + inst.parts.size());
  EXPECT_EQ(std::count_if(m.entries.begin(), m.entries.end(),
                          [](const ManifestEntry& e) { return e.role == "main"; }),
            1);
  const auto j = nlohmann::json::parse(to_json(m));
  EXPECT_EQ(j["instance_id"], "rec-7");
  for (const auto& e : j["entries"]) {
    EXPECT_EQ(e["height"], 448);
    EXPECT_EQ(e["width"], 448);
  }
}

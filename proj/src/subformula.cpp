#include "hdmer/subformula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hdmer/rng.hpp"
#include "json.hpp"

namespace hdmer {

namespace {

using Path = std::vector<std::size_t>;

Path extend(const Path& p, std::size_t i) {
  Path out = p;
  out.push_back(i);
  return out;
}

Path extend(const Path& p, std::size_t i, std::size_t j) {
  Path out = extend(p, i);
  out.push_back(j);
  return out;
}

class Enumerator {
 public:
  explicit Enumerator(int min_chars) : min_chars_(min_chars) {}

  std::vector<SubFormula> take() { return std::move(out_); }

  void add(Path path, std::optional<std::pair<std::size_t, std::size_t>> span,
           std::string latex, int chars) {
    if (chars < min_chars_) return;
    if (!seen_.emplace(path, span).second) return;
    out_.push_back(SubFormula{std::move(path), span, std::move(latex), chars});
  }

  void sequence(const Sequence& seq, const Path& path) {
    for (std::size_t i = 0; i < seq.children.size(); ++i) node(seq.children[i], extend(path, i));
  }

  void argument(const Sequence& seq, const Path& path) {
    add(path, std::nullopt, serialize(seq), char_count(seq));
    sequence(seq, path);
  }

  void node(const Node& n, const Path& path) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Group>) {
            add(path, std::nullopt, serialize(n), char_count(n));
            for (std::size_t i = 0; i < v.children.size(); ++i) {
              node(v.children[i], extend(path, i));
            }
          } else if constexpr (std::is_same_v<T, Sequence>) {
            sequence(v, path);
          } else if constexpr (std::is_same_v<T, Script>) {
            add(extend(path, 0), std::nullopt, serialize(*v.base), char_count(*v.base));
            node(*v.base, extend(path, 0));
            if (v.sub) sequence(*v.sub, extend(path, 1));
            if (v.sup) sequence(*v.sup, extend(path, 2));
          } else if constexpr (std::is_same_v<T, Frac>) {
            argument(v.numerator, extend(path, 0));
            argument(v.denominator, extend(path, 1));
          } else if constexpr (std::is_same_v<T, Radical>) {
            if (v.degree) sequence(*v.degree, extend(path, 0));
            argument(v.radicand, extend(path, 1));
          } else if constexpr (std::is_same_v<T, Command>) {
            for (std::size_t i = 0; i < v.args.size(); ++i) sequence(v.args[i], extend(path, i));
          } else if constexpr (std::is_same_v<T, Environment>) {
            for (std::size_t r = 0; r < v.rows.size(); ++r) {
              // A row on its own is only renderable inside its environment.
              Environment single{v.name, v.args, {v.rows[r]}};
              const Node row{std::move(single)};
              add(extend(path, r), std::nullopt, serialize(row), char_count(row));
              for (std::size_t c = 0; c < v.rows[r].size(); ++c) {
                argument(v.rows[r][c], extend(path, r, c));
              }
            }
          }
        },
        n.value);
  }

  // Maximal runs of the root between operators and top-level separators.
  // \left ... \right pairs are not split.
  void root_runs(const Sequence& root) {
    const auto& kids = root.children;
    int fence = 0;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
      if (end > start && !(start == 0 && end == kids.size())) {
        Sequence run;
        run.children.assign(kids.begin() + static_cast<std::ptrdiff_t>(start),
                            kids.begin() + static_cast<std::ptrdiff_t>(end));
        add({}, std::make_pair(start, end), serialize(run), char_count(run));
      }
    };
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (const auto* cmd = std::get_if<Command>(&kids[i].value)) {
        if (cmd->name == "left") ++fence;
        if (cmd->name == "right" && fence > 0) --fence;
      }
      bool delimiter = is_operator_node(kids[i]);
      if (const auto* atom = std::get_if<Atom>(&kids[i].value)) {
        delimiter = delimiter || atom->role != AtomRole::Symbol;
      }
      if (delimiter && fence == 0) {
        flush(i);
        start = i + 1;
      }
    }
    flush(kids.size());
  }

 private:
  int min_chars_;
  std::set<std::pair<Path, std::optional<std::pair<std::size_t, std::size_t>>>> seen_;
  std::vector<SubFormula> out_;
};

std::string source_of(const FormulaAst& ast) {
  return ast.source.empty() ? serialize(ast) : ast.source;
}

SubFormula whole_formula(const FormulaAst& ast) {
  return SubFormula{{}, std::nullopt, source_of(ast), char_count(ast)};
}

}  // namespace

std::vector<SubFormula> enumerate_subformulas(const FormulaAst& ast, int min_chars) {
  Enumerator e(std::max(min_chars, 1));
  e.root_runs(ast.root);
  e.sequence(ast.root, {});
  return e.take();
}

int coverage_target(int total_chars, double theta) {
  return static_cast<int>(std::ceil(theta * total_chars - 1e-9));
}

SampleResult sample_subformulas(const FormulaAst& ast, int n, double theta,
                                std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in (0, 1]");

  const int total = char_count(ast);
  const int target = coverage_target(total, theta);

  // Proper sub-formulas only: a piece as large as the formula is the formula.
  std::vector<SubFormula> candidates = enumerate_subformulas(ast, 1);
  std::erase_if(candidates, [&](const SubFormula& s) { return s.char_count >= total; });

  SampleResult result;
  if (candidates.empty() || total == 0) {
    result.parts.push_back(whole_formula(ast));
    result.coverage_fallback = true;
    return result;
  }

  std::vector<std::size_t> by_size(candidates.size());
  std::iota(by_size.begin(), by_size.end(), std::size_t{0});
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].char_count > candidates[b].char_count;
  });

  const std::size_t limit = static_cast<std::size_t>(n);
  auto complete = [&](std::vector<std::size_t> chosen) -> std::optional<std::vector<std::size_t>> {
    int sum = 0;
    for (std::size_t i : chosen) sum += candidates[i].char_count;
    for (std::size_t i : by_size) {
      if (sum >= target || chosen.size() >= limit) break;
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      chosen.push_back(i);
      sum += candidates[i].char_count;
    }
    if (sum >= target) return chosen;
    return std::nullopt;
  };

  Rng rng(rng_seed);
  std::optional<std::vector<std::size_t>> picked;
  for (int restart = 0; restart < 32 && !picked; ++restart) {
    picked = complete({static_cast<std::size_t>(uniform_index(rng, candidates.size()))});
  }
  // The n largest give the best reachable total, so this decides feasibility.
  if (!picked) picked = complete({});

  if (!picked) {
    result.parts.push_back(whole_formula(ast));
    result.coverage_fallback = true;
    return result;
  }
  for (std::size_t i : *picked) result.parts.push_back(candidates[i]);
  return result;
}

// ---------------------------------------------------------------------------
// Random crops
// ---------------------------------------------------------------------------

namespace {

// Tokens that make a poor crop boundary: a window should not start or end
// on an operator, separator or script marker.
bool loose_edge(const Token& t) {
  switch (t.kind) {
    case TokenKind::Ampersand:
    case TokenKind::RowBreak:
    case TokenKind::Superscript:
    case TokenKind::Subscript:
      return true;
    case TokenKind::OperatorSymbol:
      return is_operator_node(Node{Atom{t.text, AtomRole::Symbol}});
    case TokenKind::Command:
      return is_operator_node(Node{Command{t.name, {}}});
    default:
      return false;
  }
}

std::vector<std::ptrdiff_t> match_pairs(const TokenStream& tokens) {
  std::vector<std::ptrdiff_t> match(tokens.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenKind k = tokens[i].kind;
    if (k == TokenKind::OpenGroup || k == TokenKind::EnvBegin) {
      stack.push_back(i);
    } else if ((k == TokenKind::CloseGroup || k == TokenKind::EnvEnd) && !stack.empty()) {
      const std::size_t open = stack.back();
      stack.pop_back();
      match[open] = static_cast<std::ptrdiff_t>(i);
      match[i] = static_cast<std::ptrdiff_t>(open);
    }
  }
  return match;
}

}  // namespace

CropSpec random_crop(const FormulaAst& ast, std::uint64_t rng_seed) {
  const std::string source = source_of(ast);
  const TokenStream tokens = tokenize_significant(source);
  const std::size_t total = tokens.size();
  if (total < 2) throw TooShort("formula has fewer than two tokens");

  Rng rng(rng_seed);
  const double f = 0.5 + 0.4 * uniform01(rng);
  const std::size_t len =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(f * total)), 1, total);
  std::size_t s = uniform_index(rng, total - len + 1);
  std::size_t e = s + len;

  const auto match = match_pairs(tokens);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = s; i < e; ++i) {
      if (match[i] < 0) continue;
      const auto m = static_cast<std::size_t>(match[i]);
      if (m < s) {
        s = m;
        changed = true;
      } else if (m >= e) {
        e = m + 1;
        changed = true;
      }
    }
  }
  while (e - s > 1 && loose_edge(tokens[s])) ++s;
  while (e - s > 1 && loose_edge(tokens[e - 1])) --e;

  const std::size_t begin = tokens[s].position;
  const std::size_t end = tokens[e - 1].position + tokens[e - 1].text.size();
  return CropSpec{s, e, static_cast<double>(e - s) / static_cast<double>(total),
                  source.substr(begin, end - begin)};
}

// ---------------------------------------------------------------------------
// Training instances
// ---------------------------------------------------------------------------

const char* to_string(CropMode mode) {
  switch (mode) {
    case CropMode::NoCrop: return "no-crop";
    case CropMode::FullRandomCrop: return "full-random-crop";
    case CropMode::FullSubFormulaCrop: return "full-subformula-crop";
    case CropMode::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<CropMode> parse_crop_mode(std::string_view name) {
  for (CropMode m : {CropMode::NoCrop, CropMode::FullRandomCrop, CropMode::FullSubFormulaCrop,
                     CropMode::Hybrid}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

void SamplePlan::validate() const {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(coverage_theta > 0.0 && coverage_theta <= 1.0)) {
    throw std::invalid_argument("coverage_theta must be in (0, 1]");
  }
  if (!(lambda_percent >= 0.0 && lambda_percent <= 1.0)) {
    throw std::invalid_argument("lambda_percent must be in [0, 1]");
  }
}

double SamplePlan::effective_lambda() const {
  switch (mode) {
    case CropMode::NoCrop:
    case CropMode::FullSubFormulaCrop: return 0.0;
    case CropMode::FullRandomCrop: return 1.0;
    case CropMode::Hybrid: return lambda_percent;
  }
  return 0.0;
}

const std::string& part_latex(const Part& part) {
  return std::visit([](const auto& p) -> const std::string& { return p.latex; }, part);
}

TrainingInstance make_training_instance(const FormulaAst& ast, const SamplePlan& plan) {
  plan.validate();
  TrainingInstance inst;
  inst.main = ast;
  if (plan.mode == CropMode::NoCrop) return inst;

  Rng rng(plan.rng_seed);
  const double lambda = plan.effective_lambda();
  const bool use_random = lambda > 0.0 && uniform01(rng) < lambda;

  if (use_random) {
    inst.part_kind = PartKind::RandomCrop;
    const std::string source = source_of(ast);
    const std::size_t tokens = tokenize_significant(source).size();
    if (tokens == 1) {
      inst.parts.emplace_back(CropSpec{0, 1, 1.0, source});
    } else if (tokens >= 2) {
      for (int i = 0; i < plan.n; ++i) {
        inst.parts.emplace_back(
            random_crop(ast, derive_seed(plan.rng_seed, static_cast<std::uint64_t>(i) + 1)));
      }
    }
    inst.labels_available.assign(inst.parts.size(), false);
    return inst;
  }

  inst.part_kind = PartKind::SubFormulaCrop;
  SampleResult sample =
      sample_subformulas(ast, plan.n, plan.coverage_theta, derive_seed(plan.rng_seed, 0));
  inst.coverage_fallback = sample.coverage_fallback;
  for (SubFormula& s : sample.parts) inst.parts.emplace_back(std::move(s));
  inst.labels_available.assign(inst.parts.size(), true);
  return inst;
}

RenderManifest emit_render_manifest(const TrainingInstance& instance,
                                    const std::string& instance_id, int height, int width) {
  RenderManifest m;
  m.instance_id = instance_id;
  m.entries.push_back(ManifestEntry{source_of(instance.main), "main", height, width});
  for (const Part& part : instance.parts) {
    const char* role = std::holds_alternative<SubFormula>(part) ? "sub" : "crop";
    m.entries.push_back(ManifestEntry{part_latex(part), role, height, width});
  }
  return m;
}

std::string to_json(const RenderManifest& manifest) {
  nlohmann::ordered_json j;
  j["instance_id"] = manifest.instance_id;
  j["entries"] = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : manifest.entries) {
    j["entries"].push_back(
        {{"latex", e.latex}, {"role", e.role}, {"height", e.height}, {"width", e.width}});
  }
  return j.dump();
}

}  // namespace hdmer

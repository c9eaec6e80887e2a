#include "hdmer/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "hdmer/latex.hpp"
#include "hdmer/rng.hpp"
#include "json.hpp"

namespace hdmer {

namespace {

constexpr std::array<const char*, 8> kDomainNames = {"math", "stat",  "phy",  "q-fin",
                                                     "q-bio", "econ", "eess", "cs"};

}  // namespace

const char* to_string(Domain d) { return kDomainNames[static_cast<std::size_t>(d)]; }

std::optional<Domain> parse_domain(std::string_view name) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (name == kDomainNames[i]) return kDomains[i];
  }
  return std::nullopt;
}

const char* to_string(DisplayMode m) { return m == DisplayMode::Inline ? "inline" : "display"; }

std::optional<DisplayMode> parse_display_mode(std::string_view name) {
  if (name == "inline") return DisplayMode::Inline;
  if (name == "display") return DisplayMode::Display;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSONL I/O
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> parse_problem(const std::string& latex) {
  try {
    parse(latex);
  } catch (const ParseError& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

// Validates one decoded line; returns the first schema problem found.
std::optional<Diagnostic> decode_record(const nlohmann::json& j, std::size_t line,
                                        CorpusRecord& out) {
  auto fail = [line](std::string field, std::string message) {
    return Diagnostic{line, std::move(field), std::move(message)};
  };
  if (!j.is_object()) return fail("", "record is not a JSON object");

  auto string_field = [&](const char* key, std::string& dst) -> std::optional<Diagnostic> {
    auto it = j.find(key);
    if (it == j.end()) return fail(key, "missing field");
    if (!it->is_string()) return fail(key, "expected a string");
    dst = it->get<std::string>();
    return std::nullopt;
  };

  std::string domain, mode;
  if (auto d = string_field("id", out.id)) return d;
  if (out.id.empty()) return fail("id", "empty id");
  if (auto d = string_field("domain", domain)) return d;
  if (auto parsed = parse_domain(domain)) {
    out.domain = *parsed;
  } else {
    return fail("domain", "unknown domain '" + domain + "'");
  }
  if (auto d = string_field("latex", out.latex)) return d;
  if (auto problem = parse_problem(out.latex)) return fail("latex", *problem);

  auto labels = j.find("labels");
  if (labels == j.end()) return fail("labels", "missing field");
  if (!labels->is_array() || labels->empty()) return fail("labels", "expected a non-empty array");
  out.labels.clear();
  for (const auto& label : *labels) {
    if (!label.is_string()) return fail("labels", "labels must be strings");
    out.labels.push_back(label.get<std::string>());
    if (auto problem = parse_problem(out.labels.back())) return fail("labels", *problem);
  }

  if (auto d = string_field("display_mode", mode)) return d;
  if (auto parsed = parse_display_mode(mode)) {
    out.display_mode = *parsed;
  } else {
    return fail("display_mode", "expected inline or display");
  }
  return std::nullopt;
}

}  // namespace

LoadResult read_corpus(std::istream& in) {
  LoadResult result;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      result.diagnostics.push_back({line, "", std::string("invalid JSON: ") + e.what()});
      continue;
    }
    CorpusRecord record;
    if (auto problem = decode_record(j, line, record)) {
      result.diagnostics.push_back(std::move(*problem));
      continue;
    }
    if (!seen.insert(record.id).second) {
      result.diagnostics.push_back({line, "id", "duplicate id '" + record.id + "'"});
      continue;
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusIoError("cannot open corpus file " + path.string());
  return read_corpus(in);
}

std::string to_jsonl(const CorpusRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.id;
  j["domain"] = to_string(record.domain);
  j["latex"] = record.latex;
  j["labels"] = record.labels;
  j["display_mode"] = to_string(record.display_mode);
  return j.dump();
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const CorpusRecord& r : records) out << to_jsonl(r) << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  std::ofstream out(path);
  if (!out) throw CorpusIoError("cannot write corpus file " + path.string());
  write_corpus(out, records);
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

const char* to_string(LevelGroup g) {
  switch (g) {
    case LevelGroup::L1to2: return "[1-2]";
    case LevelGroup::L3to5: return "[3-5]";
    case LevelGroup::L6to7: return "[6-7]";
  }
  return "?";
}

const char* to_string(LineBin b) {
  switch (b) {
    case LineBin::A: return "A";
    case LineBin::B: return "B";
    case LineBin::C: return "C";
    case LineBin::D: return "D";
  }
  return "?";
}

std::optional<LevelGroup> level_group(int level) {
  if (level >= 1 && level <= 2) return LevelGroup::L1to2;
  if (level >= 3 && level <= 5) return LevelGroup::L3to5;
  if (level >= 6 && level <= 7) return LevelGroup::L6to7;
  return std::nullopt;
}

std::optional<LineBin> line_bin(int lines) {
  if (lines >= 1 && lines <= 3) return LineBin::A;
  if (lines >= 4 && lines <= 8) return LineBin::B;
  if (lines >= 9 && lines <= 20) return LineBin::C;
  if (lines >= 21 && lines <= 51) return LineBin::D;
  return std::nullopt;
}

long& StatTable::at(LevelGroup g, LineBin b, Domain d) {
  return counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)]
               [static_cast<std::size_t>(d)];
}

long StatTable::at(LevelGroup g, LineBin b, Domain d) const {
  return counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(b)]
               [static_cast<std::size_t>(d)];
}

long StatTable::total() const {
  long sum = 0;
  for (const auto& by_bin : counts) {
    for (const auto& by_domain : by_bin) {
      for (long c : by_domain) sum += c;
    }
  }
  return sum;
}

StatTable stat_table(const std::vector<CorpusRecord>& corpus) {
  StatTable table;
  for (const CorpusRecord& r : corpus) {
    const FormulaAst ast = parse(r.latex);
    const auto group = level_group(ast.level);
    const auto bin = line_bin(ast.line_count);
    if (!group || !bin) {
      ++table.overflow;
      table.overflow_ids.push_back(r.id);
      continue;
    }
    ++table.at(*group, *bin, r.domain);
  }
  return table;
}

void write_stat_csv(std::ostream& out, const StatTable& table) {
  out << "level_group,line_bin,domain,count\n";
  for (LevelGroup g : kLevelGroups) {
    for (LineBin b : kLineBins) {
      for (Domain d : kDomains) {
        out << to_string(g) << ',' << to_string(b) << ',' << to_string(d) << ','
            << table.at(g, b, d) << '\n';
      }
    }
  }
}

StatTable read_stat_csv(std::istream& in) {
  StatTable table;
  std::string line;
  if (!std::getline(in, line) || line != "level_group,line_bin,domain,count") {
    throw CorpusIoError("stat CSV: unexpected header");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
    if (cols.size() != 4) throw CorpusIoError("stat CSV: bad column count at row " + std::to_string(row));
    std::optional<LevelGroup> g;
    std::optional<LineBin> b;
    for (LevelGroup cand : kLevelGroups) {
      if (cols[0] == to_string(cand)) g = cand;
    }
    for (LineBin cand : kLineBins) {
      if (cols[1] == to_string(cand)) b = cand;
    }
    const auto d = parse_domain(cols[2]);
    if (!g || !b || !d) throw CorpusIoError("stat CSV: unknown cell at row " + std::to_string(row));
    try {
      table.at(*g, *b, *d) = std::stol(cols[3]);
    } catch (const std::exception&) {
      throw CorpusIoError("stat CSV: bad count at row " + std::to_string(row));
    }
  }
  return table;
}

std::string format_stat_grid(const StatTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(7) << "Class";
  for (LevelGroup g : kLevelGroups) {
    out << "| " << std::setw(27) << to_string(g);
  }
  out << '\n' << std::setw(7) << "";
  for (std::size_t i = 0; i < kLevelGroups.size(); ++i) {
    out << "| ";
    for (LineBin b : kLineBins) out << std::setw(7) << to_string(b);
  }
  out << '\n';
  for (Domain d : kDomains) {
    out << std::setw(7) << to_string(d);
    for (LevelGroup g : kLevelGroups) {
      out << "| ";
      for (LineBin b : kLineBins) out << std::setw(7) << table.at(g, b, d);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 8> kGreek = {"alpha", "beta", "gamma", "theta",
                                               "lambda", "mu",  "pi",    "sigma"};
constexpr std::array<const char*, 6> kOpSymbols = {"+", "-", "=", "<", ">", ","};
constexpr std::array<const char*, 8> kOpCommands = {"cdot", "times", "pm",  "leq",
                                                    "neq",  "rightarrow", "geq", "in"};
// Render-identical spellings the fair evaluator folds back together.
constexpr std::array<const char*, 4> kOpAliases = {"le", "ne", "to", "ge"};
constexpr std::array<const char*, 5> kSpacing = {",", ";", "quad", "qquad", "!"};
constexpr std::array<const char*, 4> kEnvironments = {"matrix", "pmatrix", "bmatrix", "cases"};

class Synthesizer {
 public:
  explicit Synthesizer(const SynthSpec& spec, bool minimal)
      : spec_(spec), rng_(derive_seed(spec.rng_seed, minimal ? 1u : 0u)), minimal_(minimal) {}

  Sequence formula() {
    const int level = spec_.target_level;
    const int lines = spec_.target_lines;
    if (level == 0) return Sequence{{letter()}};

    // Split the row breaks between top-level lines and one multi-row
    // environment (only available from level 2 up).
    int top_lines = lines;
    int env_rows = 1;
    if (level >= 2 && lines > 1) {
      top_lines = minimal_ ? 1 : uniform_int(rng_, 1, lines);
      env_rows = lines - top_lines + 1;
    }
    const int carrier = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(top_lines)));
    Sequence root;
    for (int line = 0; line < top_lines; ++line) {
      if (line > 0) root.children.emplace_back(Atom{"\\\\", AtomRole::RowBreak});
      Sequence row;
      if (line == carrier) {
        row = env_rows > 1 ? with_environment(level, env_rows) : exact(level);
      } else {
        row = exact(level == 1 ? uniform_int(rng_, 0, 1) : uniform_int(rng_, 0, level));
      }
      for (Node& n : row.children) root.children.push_back(std::move(n));
    }
    return root;
  }

 private:
  bool coin(double p) { return !minimal_ && uniform01(rng_) < p; }

  template <std::size_t N>
  const char* pick(const std::array<const char*, N>& pool) {
    return pool[uniform_index(rng_, N)];
  }

  Node letter() {
    const char c = static_cast<char>((coin(0.5) ? 'a' : 'A') + uniform_index(rng_, 26));
    return Atom{std::string(1, c)};
  }

  // A level-0 item that is not an operator.
  Node leaf() {
    const double u = minimal_ ? 0.0 : uniform01(rng_);
    if (u < 0.6) return letter();
    if (u < 0.85) return Atom{std::string(1, static_cast<char>('0' + uniform_index(rng_, 10)))};
    return Command{pick(kGreek), {}};
  }

  Node op() {
    const double u = uniform01(rng_);
    if (spec_.aliases && u < 0.15) return Command{pick(kOpAliases), {}};
    if (u < 0.7) return Atom{pick(kOpSymbols)};
    return Command{pick(kOpCommands), {}};
  }

  std::string frac_style() {
    if (!spec_.aliases || minimal_) return "frac";
    const double u = uniform01(rng_);
    if (u < 0.2) return "dfrac";
    if (u < 0.3) return "tfrac";
    return "frac";
  }

  // One node whose level is exactly `level` (>= 1) built around `inner`,
  // a sequence of level `level - 1`.
  Node raise(Sequence inner, int level) {
    const double u = minimal_ ? 0.0 : uniform01(rng_);
    if (u < 0.35) {
      Script s{Box<Node>(leaf()), std::nullopt, std::nullopt};
      if (coin(0.5)) {
        s.sub = std::move(inner);
        if (coin(0.3)) s.sup = Sequence{{leaf()}};
      } else {
        s.sup = std::move(inner);
        if (coin(0.3)) s.sub = Sequence{{leaf()}};
      }
      return s;
    }
    if (u < 0.7) {
      Frac f;
      f.style = frac_style();
      Sequence other = exact(uniform_int(rng_, 0, level - 1));
      if (coin(0.5)) {
        f.numerator = std::move(inner);
        f.denominator = std::move(other);
      } else {
        f.numerator = std::move(other);
        f.denominator = std::move(inner);
      }
      return f;
    }
    if (u < 0.85) {
      Radical r;
      r.radicand = std::move(inner);
      if (coin(0.2)) r.degree = Sequence{{leaf()}};
      return r;
    }
    return Command{"mathrm", {std::move(inner)}};
  }

  // A single-row environment of exactly `level` (>= 2).
  Node single_row_environment(int level) { return environment(level, 1); }

  Node environment(int level, int rows) {
    Environment env;
    env.name = minimal_ ? "matrix" : pick(kEnvironments);
    const int cols = minimal_ ? 1 : uniform_int(rng_, 1, 3);
    const int target_cell = level - 1;  // at least one cell at this level when level >= 3
    const int pinned_row = uniform_int(rng_, 0, rows - 1);
    const int pinned_col = uniform_int(rng_, 0, cols - 1);
    for (int r = 0; r < rows; ++r) {
      std::vector<Sequence> row;
      for (int c = 0; c < cols; ++c) {
        const bool pinned = r == pinned_row && c == pinned_col;
        int cell_level = pinned && level >= 3 ? target_cell : uniform_int(rng_, 0, target_cell);
        if (minimal_ && !pinned) cell_level = 0;
        row.push_back(exact(cell_level));
      }
      env.rows.push_back(std::move(row));
    }
    return env;
  }

  // The level-defining core: a node of exactly `level` (>= 1).
  Node core(int level) {
    if (level == 1) {
      const double u = minimal_ ? 0.0 : uniform01(rng_);
      if (u < 0.3) return raise(Sequence{{leaf()}}, 1);
      if (u < 0.45) return Group{{leaf(), op(), leaf()}};
      if (u < 0.55 && spec_.aliases) return Group{{Command{"rm", {}}, letter()}};
      return raise(Sequence{{leaf()}}, 1);
    }
    if (level >= 2 && coin(0.2)) return single_row_environment(level);
    return raise(exact(level - 1), level);
  }

  // Decorates a level >= 1 core with neighbours joined by operators.
  Sequence decorate(Node center, int level) {
    Sequence seq;
    const int before = coin(0.5) ? uniform_int(rng_, 1, 2) : 0;
    const int after = coin(0.5) ? uniform_int(rng_, 1, 2) : 0;
    const bool delimited = spec_.aliases && coin(0.15);
    auto neighbour = [&] {
      Sequence s = exact(uniform_int(rng_, 0, std::min(level, 1)));
      for (Node& n : s.children) seq.children.push_back(std::move(n));
    };
    for (int i = 0; i < before; ++i) {
      neighbour();
      seq.children.push_back(op());
      if (spec_.aliases && coin(0.1)) seq.children.emplace_back(Command{pick(kSpacing), {}});
    }
    if (delimited) {
      seq.children.emplace_back(Command{"left", {}});
      seq.children.emplace_back(Atom{"("});
    }
    seq.children.push_back(std::move(center));
    if (delimited) {
      seq.children.emplace_back(Command{"right", {}});
      seq.children.emplace_back(Atom{")"});
    }
    for (int i = 0; i < after; ++i) {
      seq.children.push_back(op());
      neighbour();
    }
    return seq;
  }

  // A break-free sequence of exactly `level`.
  Sequence exact(int level) {
    if (level == 0) return Sequence{{leaf()}};
    if (level == 1 && coin(0.3)) {
      Sequence s;
      s.children.push_back(leaf());
      s.children.push_back(op());
      s.children.push_back(leaf());
      return s;
    }
    return decorate(core(level), level);
  }

  // A break-free-at-top sequence of exactly `level` (>= 2) carrying one
  // environment with `rows` rows somewhere along its spine.
  Sequence with_environment(int level, int rows) {
    const int env_level = minimal_ ? level : uniform_int(rng_, 2, level);
    Node node = environment(env_level, rows);
    for (int l = env_level + 1; l <= level; ++l) node = raise(Sequence{{std::move(node)}}, l);
    return decorate(std::move(node), level);
  }

  const SynthSpec& spec_;
  Rng rng_;
  bool minimal_;
};

std::string loose_surface(const Sequence& root, Rng& rng) {
  const std::string compact = serialize_compact(root, [&] { return uniform01(rng) < 0.5; });
  std::string out;
  for (const Token& t : tokenize(compact)) {
    if (!out.empty() && uniform01(rng) < 0.15) out.push_back(' ');
    out += t.text;
  }
  return out;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.target_level < 0 || spec.target_level > 7) {
    throw InfeasibleSpec("target level must be within 0..7");
  }
  if (spec.target_lines < 1) throw InfeasibleSpec("target lines must be at least 1");
  if (spec.target_level == 0 && spec.target_lines > 1) {
    throw InfeasibleSpec("a level-0 formula is a single character and cannot span rows");
  }
  if (spec.max_chars < 1) throw InfeasibleSpec("max_chars must be positive");
}

std::string synth_formula(const SynthSpec& spec) {
  validate(spec);
  constexpr int kAttempts = 8;
  for (int attempt = 0; attempt <= kAttempts; ++attempt) {
    const bool minimal = attempt == kAttempts;
    SynthSpec s = spec;
    s.rng_seed = derive_seed(spec.rng_seed, static_cast<std::uint64_t>(attempt));
    Synthesizer gen(s, minimal);
    const Sequence root = gen.formula();
    if (char_count(root) > spec.max_chars) continue;
    if (!spec.loose_surface) return serialize(root);
    Rng surface(derive_seed(s.rng_seed, 0x5EEDu));
    return loose_surface(root, surface);
  }
  throw InfeasibleSpec("no formula with level " + std::to_string(spec.target_level) + " and " +
                       std::to_string(spec.target_lines) + " lines fits in " +
                       std::to_string(spec.max_chars) + " characters");
}

std::vector<CorpusRecord> synth_corpus(const SynthCorpusSpec& spec) {
  if (spec.min_level > spec.max_level || spec.min_lines > spec.max_lines) {
    throw InfeasibleSpec("empty level or line range");
  }
  if (spec.min_level == 0 && spec.min_lines > 1) {
    throw InfeasibleSpec("level-0 formulas are single-line, but the line range starts at " +
                         std::to_string(spec.min_lines));
  }
  std::vector<CorpusRecord> out;
  out.reserve(spec.count);
  Rng rng(spec.rng_seed);
  for (std::size_t i = 0; i < spec.count; ++i) {
    SynthSpec s;
    s.target_level = uniform_int(rng, spec.min_level, spec.max_level);
    s.target_lines = s.target_level == 0 ? 1 : uniform_int(rng, spec.min_lines, spec.max_lines);
    s.max_chars = spec.max_chars;
    s.rng_seed = derive_seed(spec.rng_seed, i);
    s.loose_surface = spec.loose_surface;
    s.aliases = spec.aliases;

    CorpusRecord r;
    std::ostringstream id;
    id << "synth-" << std::setw(6) << std::setfill('0') << i + 1;
    r.id = id.str();
    r.domain = kDomains[uniform_index(rng, kDomains.size())];
    r.latex = synth_formula(s);
    r.labels.push_back(r.latex);
    const std::string canonical = serialize(parse(r.latex));
    if (canonical != r.latex) r.labels.push_back(canonical);
    r.display_mode = s.target_lines > 1 ? DisplayMode::Display : DisplayMode::Inline;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hdmer

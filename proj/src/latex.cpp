#include "hdmer/latex.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace hdmer {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::IncompleteEscape: return "IncompleteEscape";
    case ParseErrorKind::UnterminatedEnvironmentName: return "UnterminatedEnvironmentName";
    case ParseErrorKind::UnbalancedBraces: return "UnbalancedBraces";
    case ParseErrorKind::MismatchedEnvironment: return "MismatchedEnvironment";
  }
  return "Unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t position, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " +
                         std::to_string(position) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      position_(position) {}

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Command: return "Command";
    case TokenKind::Letter: return "Letter";
    case TokenKind::Digit: return "Digit";
    case TokenKind::OperatorSymbol: return "OperatorSymbol";
    case TokenKind::OpenGroup: return "OpenGroup";
    case TokenKind::CloseGroup: return "CloseGroup";
    case TokenKind::Superscript: return "Superscript";
    case TokenKind::Subscript: return "Subscript";
    case TokenKind::Ampersand: return "Ampersand";
    case TokenKind::RowBreak: return "RowBreak";
    case TokenKind::EnvBegin: return "EnvBegin";
    case TokenKind::EnvEnd: return "EnvEnd";
    case TokenKind::Whitespace: return "Whitespace";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

// Byte length of the UTF-8 sequence introduced by `lead`.
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

TokenStream tokenize(std::string_view src) {
  TokenStream out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  auto push = [&](TokenKind kind, std::size_t begin, std::size_t end, std::string name = {}) {
    out.push_back(Token{kind, std::string(src.substr(begin, end - begin)), begin, std::move(name)});
  };

  while (i < n) {
    const char c = src[i];
    const std::size_t start = i;
    if (c == '\\') {
      if (i + 1 >= n) {
        throw ParseError(ParseErrorKind::IncompleteEscape, i, "trailing backslash");
      }
      const char next = src[i + 1];
      if (next == '\\') {
        push(TokenKind::RowBreak, start, i + 2);
        i += 2;
        continue;
      }
      if (is_ascii_letter(next)) {
        std::size_t j = i + 1;
        while (j < n && is_ascii_letter(src[j])) ++j;
        std::string name(src.substr(i + 1, j - i - 1));
        if (name == "begin" || name == "end") {
          if (j >= n || src[j] != '{') {
            throw ParseError(ParseErrorKind::UnterminatedEnvironmentName, start,
                             "expected '{' after \\" + name);
          }
          const std::size_t close = src.find('}', j + 1);
          if (close == std::string_view::npos || close == j + 1) {
            throw ParseError(ParseErrorKind::UnterminatedEnvironmentName, start,
                             "missing environment name");
          }
          std::string env(src.substr(j + 1, close - j - 1));
          if (env.find_first_of("{\\") != std::string::npos) {
            throw ParseError(ParseErrorKind::UnterminatedEnvironmentName, start,
                             "malformed environment name");
          }
          push(name == "begin" ? TokenKind::EnvBegin : TokenKind::EnvEnd, start, close + 1,
               std::move(env));
          i = close + 1;
          continue;
        }
        push(TokenKind::Command, start, j, std::move(name));
        i = j;
        continue;
      }
      // Control symbol: a single (possibly multi-byte) character.
      const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(next)), n - i - 1);
      push(TokenKind::Command, start, i + 1 + len, std::string(src.substr(i + 1, len)));
      i += 1 + len;
      continue;
    }
    if (is_space(c)) {
      std::size_t j = i;
      while (j < n && is_space(src[j])) ++j;
      push(TokenKind::Whitespace, start, j);
      i = j;
      continue;
    }
    if (is_ascii_letter(c)) { push(TokenKind::Letter, start, i + 1); ++i; continue; }
    if (is_ascii_digit(c)) { push(TokenKind::Digit, start, i + 1); ++i; continue; }
    switch (c) {
      case '{': push(TokenKind::OpenGroup, start, i + 1); ++i; continue;
      case '}': push(TokenKind::CloseGroup, start, i + 1); ++i; continue;
      case '^': push(TokenKind::Superscript, start, i + 1); ++i; continue;
      case '_': push(TokenKind::Subscript, start, i + 1); ++i; continue;
      case '&': push(TokenKind::Ampersand, start, i + 1); ++i; continue;
      default: break;
    }
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), n - i);
    push(TokenKind::OperatorSymbol, start, i + len);
    i += len;
  }
  return out;
}

TokenStream tokenize_significant(std::string_view source) {
  TokenStream all = tokenize(source);
  std::erase_if(all, [](const Token& t) { return t.kind == TokenKind::Whitespace; });
  return all;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

bool Sequence::operator==(const Sequence& o) const { return children == o.children; }
bool Group::operator==(const Group& o) const { return children == o.children; }
bool Script::operator==(const Script& o) const {
  return base == o.base && sub == o.sub && sup == o.sup;
}
bool Frac::operator==(const Frac& o) const {
  return style == o.style && numerator == o.numerator && denominator == o.denominator;
}
bool Radical::operator==(const Radical& o) const {
  return degree == o.degree && radicand == o.radicand;
}
bool Command::operator==(const Command& o) const { return name == o.name && args == o.args; }
bool Environment::operator==(const Environment& o) const {
  return name == o.name && args == o.args && rows == o.rows;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

bool is_frac_command(const std::string& name) {
  return name == "frac" || name == "dfrac" || name == "tfrac" || name == "cfrac";
}

// Arity of well-known commands. Unknown commands capture every directly
// following brace group.
std::optional<std::size_t> command_arity(const std::string& name) {
  static const std::array<std::string_view, 88> kSymbols = {
      "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta",
      "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau",
      "upsilon", "phi", "varphi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda",
      "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega", "pm", "mp", "times", "cdot", "div", "ast",
      "leq", "le", "geq", "ge", "neq", "ne", "approx", "equiv", "sim", "simeq", "propto", "in",
      "notin", "subset", "subseteq", "supset", "cup", "cap", "to", "rightarrow", "leftarrow",
      "Rightarrow", "mapsto", "wedge", "vee", "oplus", "otimes", "ll", "gg", "infty", "partial",
      "nabla", "ldots", "cdots", "dots", "sum", "prod", "int", "lim", "left", "right", "rm",
      "quad", "qquad", "displaystyle", "forall"};
  static const std::array<std::string_view, 16> kUnary = {
      "mathrm", "mathbf", "mathit", "mathcal", "mathbb", "text", "hat", "bar", "vec",
      "tilde", "dot", "ddot", "overline", "underline", "operatorname", "boldsymbol"};
  static const std::array<std::string_view, 4> kBinary = {"binom", "overset", "underset",
                                                          "stackrel"};
  if (name.size() == 1 && !is_ascii_letter(name[0])) return 0;  // control symbols
  if (std::find(kSymbols.begin(), kSymbols.end(), name) != kSymbols.end()) return 0;
  if (std::find(kUnary.begin(), kUnary.end(), name) != kUnary.end()) return 1;
  if (std::find(kBinary.begin(), kBinary.end(), name) != kBinary.end()) return 2;
  return std::nullopt;
}

bool takes_column_spec(const std::string& env) {
  return env == "array" || env == "subarray" || env == "tabular";
}

enum class Context { Top, Group, Cell, Bracket };

class Parser {
 public:
  explicit Parser(const TokenStream& tokens) {
    for (const Token& t : tokens) {
      if (t.kind != TokenKind::Whitespace) toks_.push_back(&t);
    }
  }

  FormulaAst run() {
    FormulaAst ast;
    ast.root = sequence(Context::Top, 0).first;
    ast.dangling_script = dangling_;
    return ast;
  }

 private:
  const Token* peek() const { return pos_ < toks_.size() ? toks_[pos_] : nullptr; }
  const Token* take() { return toks_[pos_++]; }
  bool at(TokenKind kind) const { return peek() != nullptr && peek()->kind == kind; }

  // Parses until the context's terminator; returns the sequence and the
  // terminating token (nullptr at end of input). The terminator is consumed.
  std::pair<Sequence, const Token*> sequence(Context ctx, std::size_t open_pos,
                                             const std::string& env = {}) {
    Sequence seq;
    while (true) {
      const Token* t = peek();
      if (t == nullptr) {
        if (ctx == Context::Group) {
          throw ParseError(ParseErrorKind::UnbalancedBraces, open_pos, "unclosed '{'");
        }
        if (ctx == Context::Cell) {
          throw ParseError(ParseErrorKind::MismatchedEnvironment, open_pos,
                           "expected \\end{" + env + "}, found end of input");
        }
        return {std::move(seq), nullptr};
      }
      switch (t->kind) {
        case TokenKind::CloseGroup:
          if (ctx == Context::Group) return {std::move(seq), take()};
          throw ParseError(ParseErrorKind::UnbalancedBraces, t->position, "unmatched '}'");
        case TokenKind::EnvEnd:
          if (ctx == Context::Cell) return {std::move(seq), take()};
          if (ctx == Context::Group) {
            throw ParseError(ParseErrorKind::UnbalancedBraces, open_pos, "unclosed '{'");
          }
          throw ParseError(ParseErrorKind::MismatchedEnvironment, t->position,
                           "unexpected \\end{" + t->name + "}");
        case TokenKind::Ampersand:
        case TokenKind::RowBreak:
          if (ctx == Context::Cell) return {std::move(seq), take()};
          take();
          seq.children.emplace_back(Atom{t->text, t->kind == TokenKind::RowBreak
                                                      ? AtomRole::RowBreak
                                                      : AtomRole::AlignTab});
          continue;
        case TokenKind::OperatorSymbol:
          if (ctx == Context::Bracket && t->text == "]") return {std::move(seq), take()};
          break;
        default:
          break;
      }
      Node node;
      if (t->kind == TokenKind::Superscript || t->kind == TokenKind::Subscript) {
        dangling_ = true;
        node = Atom{};
      } else {
        node = primary();
      }
      seq.children.push_back(attach_scripts(std::move(node)));
    }
  }

  Node attach_scripts(Node node) {
    bool wrapped = false;
    while (at(TokenKind::Superscript) || at(TokenKind::Subscript)) {
      const bool is_sup = take()->kind == TokenKind::Superscript;
      Sequence arg = argument();
      if (!wrapped) {
        node = Script{Box<Node>(std::move(node)), std::nullopt, std::nullopt};
        wrapped = true;
      }
      auto* script = &std::get<Script>(node.value);
      auto& slot = is_sup ? script->sup : script->sub;
      if (slot.has_value()) {
        // Double script: the existing script becomes the base of a new one.
        node = Script{Box<Node>(std::move(node)), std::nullopt, std::nullopt};
        script = &std::get<Script>(node.value);
      }
      (is_sup ? script->sup : script->sub) = std::move(arg);
    }
    return node;
  }

  // A macro or script argument: a brace group's content, or a single item.
  Sequence argument() {
    const Token* t = peek();
    if (t == nullptr) return {};
    switch (t->kind) {
      case TokenKind::CloseGroup:
      case TokenKind::EnvEnd:
      case TokenKind::Ampersand:
      case TokenKind::RowBreak:
      case TokenKind::Superscript:
      case TokenKind::Subscript:
        return {};
      case TokenKind::OpenGroup: {
        take();
        return sequence(Context::Group, t->position).first;
      }
      case TokenKind::OperatorSymbol:
        if (bracket_depth_ > 0 && t->text == "]") return {};
        [[fallthrough]];
      default: {
        Sequence seq;
        seq.children.push_back(primary());
        return seq;
      }
    }
  }

  // Index of a `]` closing a `[` at the current position, at brace and
  // environment depth zero.
  bool has_closing_bracket() const {
    int depth = 0;
    for (std::size_t i = pos_ + 1; i < toks_.size(); ++i) {
      const Token& t = *toks_[i];
      if (t.kind == TokenKind::OpenGroup || t.kind == TokenKind::EnvBegin) ++depth;
      if (t.kind == TokenKind::CloseGroup || t.kind == TokenKind::EnvEnd) {
        if (depth == 0) return false;
        --depth;
      }
      if (depth == 0 && t.kind == TokenKind::OperatorSymbol && t.text == "]") return true;
    }
    return false;
  }

  Node primary() {
    const Token* t = take();
    switch (t->kind) {
      case TokenKind::OpenGroup:
        return Group{sequence(Context::Group, t->position).first.children};
      case TokenKind::Command: {
        if (is_frac_command(t->name)) {
          Frac frac;
          frac.style = t->name;
          frac.numerator = argument();
          frac.denominator = argument();
          return frac;
        }
        if (t->name == "sqrt") {
          Radical rad;
          if (at(TokenKind::OperatorSymbol) && peek()->text == "[" && has_closing_bracket()) {
            const Token* open = take();
            ++bracket_depth_;
            rad.degree = sequence(Context::Bracket, open->position).first;
            --bracket_depth_;
          }
          rad.radicand = argument();
          return rad;
        }
        Command cmd;
        cmd.name = t->name;
        const auto arity = command_arity(cmd.name);
        while (at(TokenKind::OpenGroup) && (!arity || cmd.args.size() < *arity)) {
          const Token* open = take();
          cmd.args.push_back(sequence(Context::Group, open->position).first);
        }
        return cmd;
      }
      case TokenKind::EnvBegin:
        return environment(*t);
      default:
        return Atom{t->text, AtomRole::Symbol};
    }
  }

  Node environment(const Token& begin) {
    Environment env;
    env.name = begin.name;
    if (takes_column_spec(env.name) && at(TokenKind::OpenGroup)) {
      const Token* open = take();
      env.args.push_back(sequence(Context::Group, open->position).first);
    }
    std::vector<Sequence> row;
    while (true) {
      auto [cell, term] = sequence(Context::Cell, begin.position, env.name);
      row.push_back(std::move(cell));
      if (term->kind == TokenKind::Ampersand) continue;
      env.rows.push_back(std::move(row));
      row.clear();
      if (term->kind == TokenKind::RowBreak) continue;
      if (term->name != env.name) {
        throw ParseError(ParseErrorKind::MismatchedEnvironment, term->position,
                         "expected \\end{" + env.name + "}, found \\end{" + term->name + "}");
      }
      return env;
    }
  }

  std::vector<const Token*> toks_;
  std::size_t pos_ = 0;
  bool dangling_ = false;
  int bracket_depth_ = 0;
};

}  // namespace

FormulaAst parse(const TokenStream& tokens, std::string source) {
  FormulaAst ast = Parser(tokens).run();
  ast.source = std::move(source);
  ast.level = hierarchical_level(ast.root);
  ast.char_count = char_count(ast.root);
  ast.line_count = line_count(ast.root);
  return ast;
}

FormulaAst parse(std::string_view source) {
  return parse(tokenize(source), std::string(source));
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

namespace {

// True when `out` ends in a control word such as `\alpha`, which would
// swallow a following letter.
bool ends_with_control_word(const std::string& out) {
  std::size_t i = out.size();
  while (i > 0 && is_ascii_letter(out[i - 1])) --i;
  if (i == out.size() || i == 0 || out[i - 1] != '\\') return false;
  std::size_t slashes = 0;
  while (i > 0 && out[i - 1] == '\\') {
    ++slashes;
    --i;
  }
  return slashes % 2 == 1;
}

void append(std::string& out, const std::string& piece) {
  if (!piece.empty() && is_ascii_letter(piece.front()) && ends_with_control_word(out)) {
    out.push_back(' ');
  }
  out += piece;
}

// Set while serialize_compact() runs; decides per argument whether braces
// around a single character may be dropped.
thread_local const std::function<bool()>* g_elide = nullptr;

void write(std::string& out, const Node& node);

void write(std::string& out, const Sequence& seq) {
  for (const Node& child : seq.children) write(out, child);
}

bool single_char_argument(const Sequence& seq) {
  if (seq.children.size() != 1) return false;
  const auto* a = std::get_if<Atom>(&seq.children.front().value);
  return a != nullptr && a->role == AtomRole::Symbol && a->symbol.size() == 1 &&
         (is_ascii_letter(a->symbol[0]) || is_ascii_digit(a->symbol[0]));
}

void write_braced(std::string& out, const Sequence& seq) {
  if (g_elide != nullptr && single_char_argument(seq) && (*g_elide)()) {
    append(out, serialize(seq));
    return;
  }
  out.push_back('{');
  write(out, seq);
  out.push_back('}');
}

struct Writer {
  std::string& out;

  void operator()(const Atom& a) const { append(out, a.symbol); }
  void operator()(const Sequence& s) const { write(out, s); }
  void operator()(const Group& g) const {
    out.push_back('{');
    for (const Node& child : g.children) write(out, child);
    out.push_back('}');
  }
  void operator()(const Script& s) const {
    write(out, *s.base);
    if (s.sub) {
      out.push_back('_');
      write_braced(out, *s.sub);
    }
    if (s.sup) {
      out.push_back('^');
      write_braced(out, *s.sup);
    }
  }
  void operator()(const Frac& f) const {
    append(out, "\\" + f.style);
    write_braced(out, f.numerator);
    write_braced(out, f.denominator);
  }
  void operator()(const Radical& r) const {
    append(out, "\\sqrt");
    if (r.degree) {
      out.push_back('[');
      write(out, *r.degree);
      out.push_back(']');
    }
    write_braced(out, r.radicand);
  }
  void operator()(const Command& c) const {
    append(out, "\\" + c.name);
    for (const Sequence& arg : c.args) write_braced(out, arg);
  }
  void operator()(const Environment& e) const {
    append(out, "\\begin{" + e.name + "}");
    for (const Sequence& arg : e.args) write_braced(out, arg);
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
      if (r > 0) out += "\\\\";
      for (std::size_t c = 0; c < e.rows[r].size(); ++c) {
        if (c > 0) out.push_back('&');
        write(out, e.rows[r][c]);
      }
    }
    append(out, "\\end{" + e.name + "}");
  }
};

void write(std::string& out, const Node& node) { std::visit(Writer{out}, node.value); }

}  // namespace

std::string serialize(const Sequence& seq) {
  std::string out;
  write(out, seq);
  return out;
}

std::string serialize(const Node& node) {
  std::string out;
  write(out, node);
  return out;
}

std::string serialize(const FormulaAst& ast) { return serialize(ast.root); }

std::string serialize_compact(const Sequence& seq, const std::function<bool()>& elide) {
  g_elide = &elide;
  std::string out;
  try {
    write(out, seq);
  } catch (...) {
    g_elide = nullptr;
    throw;
  }
  g_elide = nullptr;
  return out;
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 10> kOperatorSymbols = {"+", "-", "=", "<", ">",
                                                               "*", "/", ",", ";", ":"};

constexpr std::array<std::string_view, 34> kOperatorCommands = {
    "pm",     "mp",     "times",      "cdot",      "div",        "ast",      "leq",
    "le",     "geq",    "ge",         "neq",       "ne",         "approx",   "equiv",
    "sim",    "simeq",  "propto",     "in",        "notin",      "subset",   "subseteq",
    "supset", "cup",    "cap",        "to",        "rightarrow", "leftarrow", "Rightarrow",
    "mapsto", "wedge",  "vee",        "oplus",     "otimes",     "ll"};

int max_level(const std::vector<Node>& nodes) {
  int best = 0;
  for (const Node& n : nodes) best = std::max(best, hierarchical_level(n));
  return best;
}

int sequence_level(const std::vector<Node>& children) {
  const bool compound = children.size() >= 2 ||
                        std::any_of(children.begin(), children.end(), is_operator_node);
  return std::max(compound ? 1 : 0, max_level(children));
}

struct LevelOf {
  int operator()(const Atom&) const { return 0; }
  int operator()(const Sequence& s) const { return sequence_level(s.children); }
  int operator()(const Group& g) const { return sequence_level(g.children); }
  int operator()(const Script& s) const {
    int inner = hierarchical_level(*s.base);
    if (s.sub) inner = std::max(inner, hierarchical_level(*s.sub));
    if (s.sup) inner = std::max(inner, hierarchical_level(*s.sup));
    return 1 + inner;
  }
  int operator()(const Frac& f) const {
    return 1 + std::max(hierarchical_level(f.numerator), hierarchical_level(f.denominator));
  }
  int operator()(const Radical& r) const {
    int inner = hierarchical_level(r.radicand);
    if (r.degree) inner = std::max(inner, hierarchical_level(*r.degree));
    return 1 + inner;
  }
  int operator()(const Command& c) const {
    if (c.args.empty()) return 0;
    int inner = 0;
    for (const Sequence& a : c.args) inner = std::max(inner, hierarchical_level(a));
    return 1 + inner;
  }
  int operator()(const Environment& e) const {
    int inner = 0;
    for (const auto& row : e.rows) {
      for (const Sequence& cell : row) inner = std::max(inner, hierarchical_level(cell));
    }
    return std::max(2, 1 + inner);
  }
};

struct CharsOf {
  int operator()(const Atom& a) const {
    return a.role == AtomRole::Symbol && !a.symbol.empty() ? 1 : 0;
  }
  int operator()(const Sequence& s) const { return sum(s.children); }
  int operator()(const Group& g) const { return sum(g.children); }
  int operator()(const Script& s) const {
    return char_count(*s.base) + (s.sub ? char_count(*s.sub) : 0) +
           (s.sup ? char_count(*s.sup) : 0);
  }
  int operator()(const Frac& f) const {
    return 1 + char_count(f.numerator) + char_count(f.denominator);
  }
  int operator()(const Radical& r) const {
    return 1 + char_count(r.radicand) + (r.degree ? char_count(*r.degree) : 0);
  }
  int operator()(const Command& c) const {
    int total = 1;
    for (const Sequence& a : c.args) total += char_count(a);
    return total;
  }
  int operator()(const Environment& e) const {
    int total = 1;
    for (const auto& row : e.rows) {
      for (const Sequence& cell : row) total += char_count(cell);
    }
    return total;
  }

  static int sum(const std::vector<Node>& nodes) {
    int total = 0;
    for (const Node& n : nodes) total += char_count(n);
    return total;
  }
};

int row_breaks(const Sequence& seq);

int row_breaks(const Node& node) {
  return std::visit(
      [](const auto& alt) -> int {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Atom>) {
          return alt.role == AtomRole::RowBreak ? 1 : 0;
        } else if constexpr (std::is_same_v<T, Sequence> || std::is_same_v<T, Group>) {
          int n = 0;
          for (const Node& c : alt.children) n += row_breaks(c);
          return n;
        } else if constexpr (std::is_same_v<T, Script>) {
          return row_breaks(*alt.base) + (alt.sub ? row_breaks(*alt.sub) : 0) +
                 (alt.sup ? row_breaks(*alt.sup) : 0);
        } else if constexpr (std::is_same_v<T, Frac>) {
          return row_breaks(alt.numerator) + row_breaks(alt.denominator);
        } else if constexpr (std::is_same_v<T, Radical>) {
          return row_breaks(alt.radicand) + (alt.degree ? row_breaks(*alt.degree) : 0);
        } else if constexpr (std::is_same_v<T, Command>) {
          int n = 0;
          for (const Sequence& a : alt.args) n += row_breaks(a);
          return n;
        } else {
          int n = static_cast<int>(alt.rows.size()) - 1;
          for (const auto& row : alt.rows) {
            for (const Sequence& cell : row) n += row_breaks(cell);
          }
          return n;
        }
      },
      node.value);
}

int row_breaks(const Sequence& seq) {
  int n = 0;
  for (const Node& c : seq.children) n += row_breaks(c);
  return n;
}

}  // namespace

bool is_operator_node(const Node& node) {
  if (const auto* atom = std::get_if<Atom>(&node.value)) {
    return atom->role == AtomRole::Symbol &&
           std::find(kOperatorSymbols.begin(), kOperatorSymbols.end(), atom->symbol) !=
               kOperatorSymbols.end();
  }
  if (const auto* cmd = std::get_if<Command>(&node.value)) {
    return cmd->args.empty() &&
           std::find(kOperatorCommands.begin(), kOperatorCommands.end(), cmd->name) !=
               kOperatorCommands.end();
  }
  return false;
}

int hierarchical_level(const Node& node) { return std::visit(LevelOf{}, node.value); }
int hierarchical_level(const Sequence& seq) { return LevelOf{}(seq); }

int char_count(const Node& node) { return std::visit(CharsOf{}, node.value); }
int char_count(const Sequence& seq) { return CharsOf{}(seq); }
int char_count(const FormulaAst& ast) { return char_count(ast.root); }

int line_count(const Sequence& seq) { return 1 + row_breaks(seq); }
int line_count(const FormulaAst& ast) { return line_count(ast.root); }

}  // namespace hdmer

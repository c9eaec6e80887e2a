#pragma once

// LaTeX math lexer, structural parser and canonical serializer.
//
// The tree produced here is the shared currency of every other module:
// sub-formula decomposition walks it, the evaluator serializes it, the
// corpus statistics measure it.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hdmer {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ParseErrorKind {
  IncompleteEscape,
  UnterminatedEnvironmentName,
  UnbalancedBraces,
  MismatchedEnvironment,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t position, const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  ParseErrorKind kind_;
  std::size_t position_;
};

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

enum class TokenKind {
  Command,
  Letter,
  Digit,
  OperatorSymbol,
  OpenGroup,
  CloseGroup,
  Superscript,
  Subscript,
  Ampersand,
  RowBreak,
  EnvBegin,
  EnvEnd,
  Whitespace,
};

const char* to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::OperatorSymbol;
  std::string text;      // exact source slice
  std::size_t position = 0;
  std::string name;      // command name without backslash, or environment name

  bool operator==(const Token&) const = default;
};

using TokenStream = std::vector<Token>;

/// Splits `source` into tokens whose texts concatenate back to `source`.
/// Unknown commands are ordinary Command tokens.
TokenStream tokenize(std::string_view source);

/// Same as tokenize() with Whitespace tokens removed.
TokenStream tokenize_significant(std::string_view source);

// ---------------------------------------------------------------------------
// Tree
// ---------------------------------------------------------------------------

struct Node;

/// Owning, deep-copying pointer so tree nodes keep value semantics.
template <class T>
class Box {
 public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class AtomRole {
  Symbol,    // a visible glyph: letter, digit, operator, punctuation
  RowBreak,  // `\\` outside any environment
  AlignTab,  // `&` outside any environment
};

struct Atom {
  std::string symbol;
  AtomRole role = AtomRole::Symbol;
  bool operator==(const Atom&) const = default;
};

struct Sequence {
  std::vector<Node> children;
  bool operator==(const Sequence&) const;
};

struct Group {
  std::vector<Node> children;
  bool operator==(const Group&) const;
};

struct Script {
  Box<Node> base;
  std::optional<Sequence> sub;
  std::optional<Sequence> sup;
  bool operator==(const Script&) const;
};

struct Frac {
  std::string style;  // frac, dfrac, tfrac, cfrac
  Sequence numerator;
  Sequence denominator;
  bool operator==(const Frac&) const;
};

struct Radical {
  std::optional<Sequence> degree;
  Sequence radicand;
  bool operator==(const Radical&) const;
};

/// Any other control sequence. Brace groups that directly follow the name
/// are captured greedily as arguments.
struct Command {
  std::string name;
  std::vector<Sequence> args;
  bool operator==(const Command&) const;
};

struct Environment {
  std::string name;
  std::vector<Sequence> args;  // column spec of array-like environments
  std::vector<std::vector<Sequence>> rows;
  bool operator==(const Environment&) const;
};

struct Node {
  using Variant =
      std::variant<Atom, Sequence, Group, Script, Frac, Radical, Command, Environment>;
  Variant value;

  Node() = default;
  template <class T>
  Node(T alt) : value(std::move(alt)) {}  // NOLINT

  bool operator==(const Node&) const = default;
};

struct FormulaAst {
  Sequence root;
  std::string source;
  int level = 0;
  int char_count = 0;
  int line_count = 1;
  // A script with no base was recovered by attaching an empty atom.
  bool dangling_script = false;
};

FormulaAst parse(const TokenStream& tokens, std::string source = {});
FormulaAst parse(std::string_view source);

// ---------------------------------------------------------------------------
// Measures and canonical form
// ---------------------------------------------------------------------------

std::string serialize(const Sequence& seq);
std::string serialize(const Node& node);
std::string serialize(const FormulaAst& ast);

/// Like serialize(), but single-character script, fraction and radical
/// arguments are written without braces wherever `elide()` returns true.
/// The result parses back to the same tree.
std::string serialize_compact(const Sequence& seq, const std::function<bool()>& elide);

int hierarchical_level(const Node& node);
int hierarchical_level(const Sequence& seq);

int char_count(const Node& node);
int char_count(const Sequence& seq);
int char_count(const FormulaAst& ast);

int line_count(const Sequence& seq);
int line_count(const FormulaAst& ast);

/// True for atoms that act as binary operators or relations (`+`, `=`,
/// `\leq`, ...). Used by the level recurrence and by run splitting.
bool is_operator_node(const Node& node);

}  // namespace hdmer

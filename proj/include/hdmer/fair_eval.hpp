#pragma once

// Fair evaluation: rewrite predictions and labels into a shared canonical
// form, then score them with character recall, edit distance and BLEU,
// keeping the best value over all labels of a sample.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hdmer/corpus.hpp"
#include "hdmer/latex.hpp"

namespace hdmer {

class NonTerminatingRule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RuleFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLabel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyCorpus : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One element of a rule pattern: a literal token, or wildcard #1..#9
/// (slot > 0) that binds a single token, brace group or environment.
struct PatternItem {
  int slot = 0;
  TokenKind kind = TokenKind::OperatorSymbol;
  std::string text;
  std::string name;
};

struct RewriteRule {
  std::string pattern_text;
  std::string replacement_text;
  std::vector<PatternItem> pattern;
  std::vector<PatternItem> replacement;
  bool builtin = false;
  // {\rm X} -> \mathrm{X}; not expressible as a flat token pattern.
  bool rm_group = false;
};

class EquivalenceRuleSet {
 public:
  /// No rules at all; normalization is canonical serialization only.
  EquivalenceRuleSet() = default;

  static EquivalenceRuleSet with_builtins();
  /// Rule file: {"rules": [{"pattern": .., "replacement": ..}], "builtins": bool}.
  static EquivalenceRuleSet from_json(std::string_view text);
  static EquivalenceRuleSet load(const std::filesystem::path& path);

  /// Adds a user rule after checking that it cannot break termination:
  /// the replacement may not be longer than the pattern, and equal-length
  /// rules must not form a cycle in the induced token order.
  void add_rule(std::string_view pattern, std::string_view replacement);

  bool builtins_enabled() const { return builtins_; }
  std::size_t size() const { return rules_.size(); }
  const RewriteRule& rule(std::size_t i) const { return rules_.at(i); }

  /// Applies rules until none matches.
  TokenStream rewrite(TokenStream tokens) const;

  /// Applies rule `i` once at its leftmost match; nullopt when it does not
  /// match anywhere.
  std::optional<std::string> apply_once(std::size_t i, std::string_view latex) const;

 private:
  void add_builtins();
  void push(RewriteRule rule);

  std::vector<RewriteRule> rules_;
  std::vector<std::pair<std::string, std::string>> order_;  // a must rank above b
  bool builtins_ = false;
};

/// Concatenates token texts, inserting a space only where a control word
/// would otherwise absorb a following letter.
std::string join_tokens(const TokenStream& tokens);

/// Rewrites to a fixed point, then canonical serialization. Throws
/// ParseError when `latex` does not tokenize.
std::string normalize(std::string_view latex, const EquivalenceRuleSet& rules);

/// Levenshtein distance over Unicode scalar values.
int edit_distance(std::string_view a, std::string_view b);

/// Length in Unicode scalar values.
std::size_t code_point_length(std::string_view s);

/// 1 - edit_distance / length(label). Not clamped. Throws EmptyLabel.
double char_recall(std::string_view prediction, std::string_view label);

/// Sentence BLEU over token sequences, n-grams 1..4, add-one smoothing for
/// orders with no matches, brevity penalty when the prediction is shorter.
double bleu(const std::vector<std::string>& prediction, const std::vector<std::string>& label);

/// Token BLEU on LaTeX lexer tokens; strings that do not lex are split
/// into code points instead.
double bleu(std::string_view prediction, std::string_view label);

struct EvalSample {
  std::string id;
  std::string prediction;
  std::vector<std::string> labels;
};

enum class EvalMode { NonFair, Fair };

struct MetricScores {
  double cr = 0.0;
  int aed = 0;
  double bleu = 0.0;
};

struct SampleScores {
  MetricScores scores;
  std::size_t best_cr = 0;
  std::size_t best_aed = 0;
  std::size_t best_bleu = 0;
  // Some string did not tokenize and was scored character-wise.
  bool fallback = false;
};

SampleScores evaluate_sample(const EvalSample& sample, const EquivalenceRuleSet& rules,
                             EvalMode mode);

struct SampleReport {
  std::string id;
  SampleScores nonfair;
  SampleScores fair;
};

struct Aggregate {
  double cr = 0.0;
  double aed = 0.0;
  double bleu = 0.0;
};

struct EvalReport {
  std::vector<SampleReport> per_sample;
  Aggregate nonfair;
  Aggregate fair;
};

/// Scores every sample in both modes, in parallel.
EvalReport evaluate_corpus(const std::vector<EvalSample>& samples,
                           const EquivalenceRuleSet& rules);
/// Single-threaded reference for evaluate_corpus(); identical output.
EvalReport evaluate_corpus_serial(const std::vector<EvalSample>& samples,
                                  const EquivalenceRuleSet& rules);

/// Report JSON; numbers carry 6 decimals.
std::string to_json(const EvalReport& report, bool include_nonfair = true,
                    bool include_fair = true);

struct EvalLoadResult {
  std::vector<EvalSample> samples;
  std::vector<Diagnostic> diagnostics;
};

/// JSONL, one {"id", "prediction", "labels"} object per line.
EvalLoadResult read_eval_samples(std::istream& in);
EvalLoadResult load_eval_samples(const std::filesystem::path& path);

}  // namespace hdmer

#include "hdmer/fair_eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hdmer/json_format.hpp"
#include "json.hpp"

namespace hdmer {

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

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

std::vector<PatternItem> parse_pattern(std::string_view text) {
  TokenStream toks;
  try {
    toks = tokenize_significant(text);
  } catch (const ParseError& e) {
    throw RuleFileError("rule fragment '" + std::string(text) + "' does not tokenize: " + e.what());
  }
  std::vector<PatternItem> items;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.text == "#" && i + 1 < toks.size() && toks[i + 1].kind == TokenKind::Digit &&
        toks[i + 1].text != "0") {
      items.push_back(PatternItem{toks[i + 1].text[0] - '0', TokenKind::OperatorSymbol,
                                  "#" + toks[i + 1].text, {}});
      ++i;
      continue;
    }
    items.push_back(PatternItem{0, t.kind, t.text, t.name});
  }
  return items;
}

// End (exclusive) of the unit starting at `i`: a brace group, an
// environment, or a single token. Closers cannot start a unit.
std::optional<std::size_t> unit_end(const TokenStream& toks, std::size_t i) {
  const TokenKind k = toks[i].kind;
  if (k == TokenKind::CloseGroup || k == TokenKind::EnvEnd) return std::nullopt;
  if (k != TokenKind::OpenGroup && k != TokenKind::EnvBegin) return i + 1;
  const TokenKind close = k == TokenKind::OpenGroup ? TokenKind::CloseGroup : TokenKind::EnvEnd;
  int depth = 0;
  for (std::size_t j = i; j < toks.size(); ++j) {
    if (toks[j].kind == k) ++depth;
    if (toks[j].kind == close && --depth == 0) return j + 1;
  }
  return std::nullopt;
}

bool same_token(const Token& t, const PatternItem& p) { return t.kind == p.kind && t.text == p.text; }

using Binding = std::pair<std::size_t, std::size_t>;

bool try_apply(const RewriteRule& rule, TokenStream& toks, std::size_t at) {
  if (rule.rm_group) {
    if (at + 1 >= toks.size() || toks[at].kind != TokenKind::OpenGroup ||
        toks[at + 1].kind != TokenKind::Command || toks[at + 1].name != "rm") {
      return false;
    }
    if (!unit_end(toks, at)) return false;
    toks[at + 1] = toks[at];
    toks[at] = Token{TokenKind::Command, "\\mathrm", 0, "mathrm"};
    return true;
  }

  std::array<std::optional<Binding>, 10> bound{};
  std::size_t pos = at;
  for (const PatternItem& item : rule.pattern) {
    if (pos >= toks.size()) return false;
    if (item.slot == 0) {
      if (!same_token(toks[pos], item)) return false;
      ++pos;
      continue;
    }
    // `{#1}` binds the whole group content; elsewhere a wildcard is one unit.
    std::optional<std::size_t> end;
    if (&item != &rule.pattern.back() && (&item + 1)->slot == 0 &&
        (&item + 1)->kind == TokenKind::CloseGroup) {
      int depth = 0;
      for (std::size_t j = pos; j < toks.size() && !end; ++j) {
        if (toks[j].kind == TokenKind::OpenGroup) ++depth;
        if (toks[j].kind == TokenKind::CloseGroup && depth-- == 0) end = j;
      }
      if (end && *end == pos) return false;
    } else {
      end = unit_end(toks, pos);
    }
    if (!end) return false;
    auto& slot = bound[static_cast<std::size_t>(item.slot)];
    if (slot) {
      const std::size_t len = slot->second - slot->first;
      if (*end - pos != len ||
          !std::equal(toks.begin() + static_cast<std::ptrdiff_t>(pos),
                      toks.begin() + static_cast<std::ptrdiff_t>(*end),
                      toks.begin() + static_cast<std::ptrdiff_t>(slot->first),
                      [](const Token& x, const Token& y) {
                        return x.kind == y.kind && x.text == y.text;
                      })) {
        return false;
      }
    } else {
      slot = Binding{pos, *end};
    }
    pos = *end;
  }

  TokenStream out;
  for (const PatternItem& item : rule.replacement) {
    if (item.slot == 0) {
      out.push_back(Token{item.kind, item.text, 0, item.name});
    } else {
      const Binding b = *bound[static_cast<std::size_t>(item.slot)];
      out.insert(out.end(), toks.begin() + static_cast<std::ptrdiff_t>(b.first),
                 toks.begin() + static_cast<std::ptrdiff_t>(b.second));
    }
  }
  toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(at),
             toks.begin() + static_cast<std::ptrdiff_t>(pos));
  toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(at), out.begin(), out.end());
  return true;
}

bool has_cycle(const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : edges) adj[a].push_back(b);
  std::map<std::string, int> state;  // 1 on stack, 2 done
  std::function<bool(const std::string&)> visit = [&](const std::string& v) {
    int& s = state[v];
    if (s == 1) return true;
    if (s == 2) return false;
    s = 1;
    for (const auto& w : adj[v]) {
      if (visit(w)) return true;
    }
    state[v] = 2;
    return false;
  };
  for (const auto& [a, _] : adj) {
    if (visit(a)) return true;
  }
  return false;
}

struct BuiltinRule {
  const char* pattern;
  const char* replacement;
};

constexpr BuiltinRule kBuiltins[] = {
    {"\\dfrac", "\\frac"},   {"\\tfrac", "\\frac"},      {"\\le", "\\leq"},
    {"\\ne", "\\neq"},       {"\\to", "\\rightarrow"},   {"\\left(", "("},
    {"\\right)", ")"},       {"\\left[", "["},           {"\\right]", "]"},
    {"\\left\\{", "\\{"},    {"\\right\\}", "\\}"},      {"\\left|", "|"},
    {"\\right|", "|"},       {"\\,", ""},                {"\\;", ""},
    {"\\!", ""},             {"\\quad", ""},             {"\\qquad", ""},
    {"\\ ", ""},
};

}  // namespace

std::string join_tokens(const TokenStream& tokens) {
  std::string out;
  for (const Token& t : tokens) {
    if (!t.text.empty() && is_ascii_letter(t.text.front()) && ends_with_control_word(out)) {
      out.push_back(' ');
    }
    out += t.text;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule sets
// ---------------------------------------------------------------------------

void EquivalenceRuleSet::push(RewriteRule rule) {
  auto edges = order_;
  if (rule.rm_group) {
    edges.emplace_back("{", "\\mathrm");
  } else {
    if (rule.pattern.empty()) throw NonTerminatingRule("empty pattern");
    std::map<int, int> in_pattern, in_replacement;
    for (const auto& p : rule.pattern) {
      if (p.slot) ++in_pattern[p.slot];
    }
    for (const auto& r : rule.replacement) {
      if (!r.slot) continue;
      if (!in_pattern.count(r.slot)) {
        throw RuleFileError("replacement uses unbound wildcard in '" + rule.replacement_text + "'");
      }
      if (++in_replacement[r.slot] > in_pattern[r.slot]) {
        throw NonTerminatingRule("rule duplicates a wildcard: '" + rule.pattern_text + "' -> '" +
                                 rule.replacement_text + "'");
      }
    }
    // With every wildcard used no more often than bound, the unit count
    // bounds the change in token count from above.
    if (rule.replacement.size() > rule.pattern.size()) {
      throw NonTerminatingRule("rule grows: '" + rule.pattern_text + "' -> '" +
                               rule.replacement_text + "'");
    }
    if (rule.replacement.size() == rule.pattern.size()) {
      std::size_t k = 0;
      while (k < rule.pattern.size() && rule.pattern[k].slot == rule.replacement[k].slot &&
             rule.pattern[k].text == rule.replacement[k].text) {
        ++k;
      }
      bool wildcards_aligned = true;
      for (std::size_t i = 0; i < rule.pattern.size(); ++i) {
        if (rule.pattern[i].slot != rule.replacement[i].slot) wildcards_aligned = false;
      }
      if (k == rule.pattern.size() || !wildcards_aligned || in_replacement != in_pattern) {
        throw NonTerminatingRule("length-preserving rule does not decrease the token order: '" +
                                 rule.pattern_text + "' -> '" + rule.replacement_text + "'");
      }
      edges.emplace_back(rule.pattern[k].text, rule.replacement[k].text);
    }
  }
  if (has_cycle(edges)) {
    throw NonTerminatingRule("rule '" + rule.pattern_text + "' -> '" + rule.replacement_text +
                             "' closes a rewrite cycle");
  }
  order_ = std::move(edges);
  rules_.push_back(std::move(rule));
}

void EquivalenceRuleSet::add_builtins() {
  builtins_ = true;
  for (const BuiltinRule& b : kBuiltins) {
    push(RewriteRule{b.pattern, b.replacement, parse_pattern(b.pattern),
                     parse_pattern(b.replacement), true, false});
  }
  push(RewriteRule{"{\\rm #1}", "\\mathrm{#1}", {}, {}, true, true});
}

EquivalenceRuleSet EquivalenceRuleSet::with_builtins() {
  EquivalenceRuleSet set;
  set.add_builtins();
  return set;
}

void EquivalenceRuleSet::add_rule(std::string_view pattern, std::string_view replacement) {
  push(RewriteRule{std::string(pattern), std::string(replacement), parse_pattern(pattern),
                   parse_pattern(replacement), false, false});
}

EquivalenceRuleSet EquivalenceRuleSet::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw RuleFileError(std::string("rule file is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw RuleFileError("rule file must be a JSON object");
  EquivalenceRuleSet set;
  const auto builtins = j.find("builtins");
  if (builtins != j.end() && !builtins->is_boolean()) {
    throw RuleFileError("\"builtins\" must be a boolean");
  }
  if (builtins == j.end() || builtins->get<bool>()) set.add_builtins();
  const auto rules = j.find("rules");
  if (rules == j.end()) return set;
  if (!rules->is_array()) throw RuleFileError("\"rules\" must be an array");
  for (const auto& r : *rules) {
    if (!r.is_object() || !r.contains("pattern") || !r.contains("replacement") ||
        !r["pattern"].is_string() || !r["replacement"].is_string()) {
      throw RuleFileError("each rule needs string \"pattern\" and \"replacement\"");
    }
    set.add_rule(r["pattern"].get<std::string>(), r["replacement"].get<std::string>());
  }
  return set;
}

EquivalenceRuleSet EquivalenceRuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuleFileError("cannot open rule file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

TokenStream EquivalenceRuleSet::rewrite(TokenStream tokens) const {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < tokens.size();) {
      bool hit = false;
      for (const RewriteRule& rule : rules_) {
        if (try_apply(rule, tokens, i)) {
          hit = changed = true;
          break;
        }
      }
      if (!hit) ++i;
    }
  }
  return tokens;
}

std::optional<std::string> EquivalenceRuleSet::apply_once(std::size_t i,
                                                          std::string_view latex) const {
  TokenStream toks = tokenize_significant(latex);
  for (std::size_t at = 0; at < toks.size(); ++at) {
    if (try_apply(rules_.at(i), toks, at)) return join_tokens(toks);
  }
  return std::nullopt;
}

std::string normalize(std::string_view latex, const EquivalenceRuleSet& rules) {
  std::string current(latex);
  // Canonical serialization can expose new matches (e.g. added braces),
  // so alternate until the string itself is stable.
  for (int round = 0; round < 32; ++round) {
    const std::string joined = join_tokens(rules.rewrite(tokenize_significant(current)));
    std::string next;
    try {
      next = serialize(parse(joined));
    } catch (const ParseError&) {
      next = joined;
    }
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

std::u32string code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead < 0xF8) { len = 4; cp = lead & 0x07; }
    else if (lead >= 0xE0) { len = 3; cp = lead & 0x0F; }
    else if (lead >= 0xC0) { len = 2; cp = lead & 0x1F; }
    if (lead < 0xC0 || lead >= 0xF8 || i + len > s.size()) {
      out.push_back(lead);  // ASCII or stray byte
      ++i;
      continue;
    }
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::vector<std::string> code_point_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = lead < 0xC0 ? 1 : lead < 0xE0 ? 2 : lead < 0xF0 ? 3 : 4;
    len = std::min(len, s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::optional<std::vector<std::string>> lexer_tokens(std::string_view s) {
  try {
    std::vector<std::string> out;
    for (const Token& t : tokenize_significant(s)) out.push_back(t.text);
    return out;
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

}  // namespace

std::size_t code_point_length(std::string_view s) { return code_points(s).size(); }

int edit_distance(std::string_view a_text, std::string_view b_text) {
  std::u32string a = code_points(a_text);
  std::u32string b = code_points(b_text);
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double char_recall(std::string_view prediction, std::string_view label) {
  const std::size_t n = code_point_length(label);
  if (n == 0) throw EmptyLabel("character recall needs a non-empty label");
  return 1.0 - static_cast<double>(edit_distance(prediction, label)) / static_cast<double>(n);
}

double bleu(const std::vector<std::string>& pred, const std::vector<std::string>& label) {
  if (pred.empty()) return label.empty() ? 1.0 : 0.0;
  if (label.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, int> ref;
    for (std::size_t i = 0; i + n <= label.size(); ++i) {
      ++ref[std::vector<std::string>(label.begin() + static_cast<std::ptrdiff_t>(i),
                                     label.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    std::map<std::vector<std::string>, int> hyp;
    std::size_t total = 0;
    for (std::size_t i = 0; i + n <= pred.size(); ++i, ++total) {
      ++hyp[std::vector<std::string>(pred.begin() + static_cast<std::ptrdiff_t>(i),
                                     pred.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    std::size_t matches = 0;
    for (const auto& [gram, count] : hyp) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += static_cast<std::size_t>(std::min(count, it->second));
    }
    const double p = matches == 0 ? 1.0 / static_cast<double>(total + 1)
                                  : static_cast<double>(matches) / static_cast<double>(total);
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(pred.size());
  const double r = static_cast<double>(label.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double bleu(std::string_view prediction, std::string_view label) {
  auto p = lexer_tokens(prediction);
  auto l = lexer_tokens(label);
  return bleu(p ? *p : code_point_tokens(prediction), l ? *l : code_point_tokens(label));
}

// ---------------------------------------------------------------------------
// Sample and corpus evaluation
// ---------------------------------------------------------------------------

SampleScores evaluate_sample(const EvalSample& sample, const EquivalenceRuleSet& rules,
                             EvalMode mode) {
  if (sample.labels.empty()) throw EmptyLabel("sample '" + sample.id + "' has no labels");
  SampleScores out;
  std::string pred = sample.prediction;
  std::vector<std::string> labels = sample.labels;
  if (mode == EvalMode::Fair) {
    try {
      pred = normalize(sample.prediction, rules);
      for (std::size_t j = 0; j < labels.size(); ++j) {
        labels[j] = normalize(sample.labels[j], rules);
        // A label made only of removable spacing keeps its raw form.
        if (labels[j].empty()) {
          labels[j] = sample.labels[j];
          out.fallback = true;
        }
      }
    } catch (const ParseError&) {
      pred = sample.prediction;
      labels = sample.labels;
      out.fallback = true;
    }
  }

  auto pred_tokens = lexer_tokens(pred);
  if (!pred_tokens) {
    out.fallback = true;
    pred_tokens = code_point_tokens(pred);
  }

  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto label_tokens = lexer_tokens(labels[j]);
    if (!label_tokens) {
      out.fallback = true;
      label_tokens = code_point_tokens(labels[j]);
    }
    const double cr = char_recall(pred, labels[j]);
    const int aed = edit_distance(pred, labels[j]);
    const double bl = bleu(*pred_tokens, *label_tokens);
    if (j == 0 || cr > out.scores.cr) {
      out.scores.cr = cr;
      out.best_cr = j;
    }
    if (j == 0 || aed < out.scores.aed) {
      out.scores.aed = aed;
      out.best_aed = j;
    }
    if (j == 0 || bl > out.scores.bleu) {
      out.scores.bleu = bl;
      out.best_bleu = j;
    }
  }
  return out;
}

namespace {

void check_samples(const std::vector<EvalSample>& samples) {
  if (samples.empty()) throw EmptyCorpus("no samples to evaluate");
  for (const EvalSample& s : samples) {
    if (s.labels.empty()) throw EmptyLabel("sample '" + s.id + "' has no labels");
    for (const std::string& l : s.labels) {
      if (l.empty()) throw EmptyLabel("sample '" + s.id + "' has an empty label");
    }
  }
}

// Sorting first makes the sum independent of sample order.
double mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Aggregate aggregate(const std::vector<SampleReport>& rows, SampleScores SampleReport::*mode) {
  std::vector<double> cr, aed, bl;
  for (const SampleReport& r : rows) {
    cr.push_back((r.*mode).scores.cr);
    aed.push_back((r.*mode).scores.aed);
    bl.push_back((r.*mode).scores.bleu);
  }
  return Aggregate{mean(cr), mean(aed), mean(bl)};
}

EvalReport finish(std::vector<SampleReport> rows) {
  EvalReport report;
  report.nonfair = aggregate(rows, &SampleReport::nonfair);
  report.fair = aggregate(rows, &SampleReport::fair);
  report.per_sample = std::move(rows);
  return report;
}

SampleReport score(const EvalSample& s, const EquivalenceRuleSet& rules) {
  return SampleReport{s.id, evaluate_sample(s, rules, EvalMode::NonFair),
                      evaluate_sample(s, rules, EvalMode::Fair)};
}

}  // namespace

EvalReport evaluate_corpus(const std::vector<EvalSample>& samples,
                           const EquivalenceRuleSet& rules) {
  check_samples(samples);
  std::vector<SampleReport> rows(samples.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = score(samples[static_cast<std::size_t>(i)], rules);
    } catch (...) {
#pragma omp critical(hdmer_eval_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return finish(std::move(rows));
}

EvalReport evaluate_corpus_serial(const std::vector<EvalSample>& samples,
                                  const EquivalenceRuleSet& rules) {
  check_samples(samples);
  std::vector<SampleReport> rows;
  rows.reserve(samples.size());
  for (const EvalSample& s : samples) rows.push_back(score(s, rules));
  return finish(std::move(rows));
}

namespace {

nlohmann::ordered_json scores_json(const SampleScores& s) {
  nlohmann::ordered_json j;
  j["cr"] = s.scores.cr;
  j["aed"] = s.scores.aed;
  j["bleu"] = s.scores.bleu;
  j["best_label"] = {{"cr", s.best_cr}, {"aed", s.best_aed}, {"bleu", s.best_bleu}};
  j["fallback"] = s.fallback;
  return j;
}

nlohmann::ordered_json aggregate_json(const Aggregate& a) {
  nlohmann::ordered_json j;
  j["cr"] = a.cr;
  j["aed"] = a.aed;
  j["bleu"] = a.bleu;
  return j;
}

}  // namespace

std::string to_json(const EvalReport& report, bool include_nonfair, bool include_fair) {
  nlohmann::ordered_json j;
  j["per_sample"] = nlohmann::ordered_json::array();
  for (const SampleReport& r : report.per_sample) {
    nlohmann::ordered_json row;
    row["id"] = r.id;
    if (include_nonfair) row["nonfair"] = scores_json(r.nonfair);
    if (include_fair) row["fair"] = scores_json(r.fair);
    j["per_sample"].push_back(std::move(row));
  }
  nlohmann::ordered_json agg;
  agg["count"] = report.per_sample.size();
  if (include_nonfair) agg["nonfair"] = aggregate_json(report.nonfair);
  if (include_fair) agg["fair"] = aggregate_json(report.fair);
  j["aggregate"] = std::move(agg);
  return dump_fixed(j, 6, 2);
}

EvalLoadResult read_eval_samples(std::istream& in) {
  EvalLoadResult result;
  std::unordered_set<std::string> ids;
  std::string text;
  for (std::size_t line = 1; std::getline(in, text); ++line) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& field, const std::string& message) {
      result.diagnostics.push_back(Diagnostic{line, field, message});
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail("", std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (!j.is_object()) {
      fail("", "expected a JSON object");
      continue;
    }
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      fail("id", "missing or non-string id");
      continue;
    }
    if (!j.contains("prediction") || !j["prediction"].is_string()) {
      fail("prediction", "missing or non-string prediction");
      continue;
    }
    if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].empty()) {
      fail("labels", "labels must be a non-empty array");
      continue;
    }
    EvalSample s;
    s.id = j["id"].get<std::string>();
    s.prediction = j["prediction"].get<std::string>();
    bool ok = true;
    for (const auto& l : j["labels"]) {
      if (!l.is_string() || l.get<std::string>().empty()) {
        ok = false;
        break;
      }
      s.labels.push_back(l.get<std::string>());
    }
    if (!ok) {
      fail("labels", "every label must be a non-empty string");
      continue;
    }
    if (!ids.insert(s.id).second) {
      fail("id", "duplicate id '" + s.id + "'");
      continue;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

EvalLoadResult load_eval_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusIoError("cannot open " + path.string());
  return read_eval_samples(in);
}

}  // namespace hdmer

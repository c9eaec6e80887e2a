// hdmer: command-line front end for formula analysis, decomposition,
// evaluation, synthesis and toy training.
//
// Exit codes: 0 ok, 1 usage, 2 parse error, 3 corpus/schema error,
// 4 infeasible synthesis spec, 5 numeric failure.

#include <algorithm>
#include <exception>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdmer/corpus.hpp"
#include "hdmer/fair_eval.hpp"
#include "hdmer/fusion.hpp"
#include "hdmer/latex.hpp"
#include "hdmer/rng.hpp"
#include "hdmer/subformula.hpp"
#include "json.hpp"

namespace {

using namespace hdmer;
using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 20240517;

enum Exit { kOk = 0, kParse = 2, kSchema = 3, kInfeasible = 4, kNumeric = 5 };

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { Error, Warn, Info };
LogLevel g_log = LogLevel::Info;

void warn(const std::string& msg) {
  if (g_log >= LogLevel::Warn) std::cerr << "warning: " << msg << '\n';
}
void info(const std::string& msg) {
  if (g_log >= LogLevel::Info) std::cerr << msg << '\n';
}

// Data goes to `path`, or to stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusIoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "3" or "1-3".
std::pair<int, int> parse_range(const std::string& text, const char* what) {
  int lo = 0, hi = 0;
  char dash = 0;
  std::istringstream in(text);
  if (!(in >> lo)) throw CLI::ValidationError(what, "expected N or A-B, got '" + text + "'");
  if (in >> dash) {
    if (dash != '-' || !(in >> hi)) {
      throw CLI::ValidationError(what, "expected N or A-B, got '" + text + "'");
    }
  } else {
    hi = lo;
  }
  return {lo, hi};
}

std::vector<CorpusRecord> load_checked(const std::string& path, bool lenient) {
  LoadResult loaded = load_corpus(path);
  for (const Diagnostic& d : loaded.diagnostics) {
    const std::string msg = path + ":" + std::to_string(d.line) + ": " +
                            (d.field.empty() ? "" : d.field + ": ") + d.message;
    if (!lenient) throw SchemaError(msg);
    warn(msg + " (skipped)");
  }
  if (loaded.records.empty()) throw SchemaError(path + ": corpus has no records");
  return std::move(loaded.records);
}

void sort_by_id(std::vector<CorpusRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const CorpusRecord& a, const CorpusRecord& b) { return a.id < b.id; });
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

ordered_json seq_json(const Sequence& seq);

ordered_json node_json(const Node& node) {
  return std::visit(
      [](const auto& n) -> ordered_json {
        using T = std::decay_t<decltype(n)>;
        ordered_json j;
        if constexpr (std::is_same_v<T, Atom>) {
          j["type"] = n.role == AtomRole::Symbol     ? "atom"
                      : n.role == AtomRole::RowBreak ? "row_break"
                                                     : "align_tab";
          j["symbol"] = n.symbol;
        } else if constexpr (std::is_same_v<T, Sequence>) {
          j["type"] = "sequence";
          j["children"] = seq_json(n);
        } else if constexpr (std::is_same_v<T, Group>) {
          j["type"] = "group";
          j["children"] = seq_json(Sequence{n.children});
        } else if constexpr (std::is_same_v<T, Script>) {
          j["type"] = "script";
          j["base"] = node_json(*n.base);
          if (n.sub) j["sub"] = seq_json(*n.sub);
          if (n.sup) j["sup"] = seq_json(*n.sup);
        } else if constexpr (std::is_same_v<T, Frac>) {
          j["type"] = "frac";
          j["style"] = n.style;
          j["numerator"] = seq_json(n.numerator);
          j["denominator"] = seq_json(n.denominator);
        } else if constexpr (std::is_same_v<T, Radical>) {
          j["type"] = "radical";
          if (n.degree) j["degree"] = seq_json(*n.degree);
          j["radicand"] = seq_json(n.radicand);
        } else if constexpr (std::is_same_v<T, Command>) {
          j["type"] = "command";
          j["name"] = n.name;
          j["args"] = ordered_json::array();
          for (const auto& a : n.args) j["args"].push_back(seq_json(a));
        } else {
          j["type"] = "environment";
          j["name"] = n.name;
          j["args"] = ordered_json::array();
          for (const auto& a : n.args) j["args"].push_back(seq_json(a));
          j["rows"] = ordered_json::array();
          for (const auto& row : n.rows) {
            ordered_json r = ordered_json::array();
            for (const auto& cell : row) r.push_back(seq_json(cell));
            j["rows"].push_back(std::move(r));
          }
        }
        return j;
      },
      node.value);
}

ordered_json seq_json(const Sequence& seq) {
  ordered_json arr = ordered_json::array();
  for (const Node& c : seq.children) arr.push_back(node_json(c));
  return arr;
}

void print_tree(std::ostream& out, const ordered_json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (j.is_array()) {
    for (const auto& c : j) print_tree(out, c, depth);
    return;
  }
  out << pad << j["type"].get<std::string>();
  for (const char* key : {"symbol", "name", "style"}) {
    if (j.contains(key)) out << ' ' << j[key].get<std::string>();
  }
  out << '\n';
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_structured()) continue;
    out << pad << "  ." << it.key() << '\n';
    print_tree(out, it.value(), depth + 2);
  }
}

int cmd_parse(const std::string& input, const std::string& expr, bool input_given, bool as_json) {
  std::string source = expr;
  if (input_given) {
    source = read_file(input);
    while (!source.empty() && (source.back() == '\n' || source.back() == '\r')) source.pop_back();
  }
  const FormulaAst ast = parse(source);
  if (ast.dangling_script) warn("script without a base; attached an empty atom");
  ordered_json j;
  j["level"] = ast.level;
  j["char_count"] = ast.char_count;
  j["line_count"] = ast.line_count;
  j["ast"] = seq_json(ast.root);
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "level " << ast.level << ", chars " << ast.char_count << ", lines "
              << ast.line_count << '\n'
              << "canonical: " << serialize(ast) << '\n';
    print_tree(std::cout, j["ast"], 0);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& corpus_path, const std::string& csv, bool lenient) {
  const std::vector<CorpusRecord> corpus = load_checked(corpus_path, lenient);
  const StatTable table = stat_table(corpus);
  if (table.overflow > 0) {
    warn(std::to_string(table.overflow) + " record(s) fall outside levels 1-7 / lines 1-51");
  }
  if (!csv.empty()) {
    Output out(csv);
    write_stat_csv(out.stream(), table);
    std::cout << format_stat_grid(table);
  } else {
    write_stat_csv(std::cout, table);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string corpus, manifests, mode = "hybrid";
  int n = 4;
  double theta = 0.7, lambda = 0.3;
  int height = 448, width = 448;
  bool lenient = false;
};

int cmd_decompose(const DecomposeArgs& a, std::uint64_t seed) {
  const auto mode = parse_crop_mode(a.mode);
  if (!mode) throw CLI::ValidationError("--mode", "unknown crop mode '" + a.mode + "'");
  SamplePlan plan;
  plan.mode = *mode;
  plan.n = a.n;
  plan.coverage_theta = a.theta;
  plan.lambda_percent = a.lambda;
  plan.rng_seed = seed;
  plan.validate();

  std::vector<CorpusRecord> corpus = load_checked(a.corpus, a.lenient);
  sort_by_id(corpus);

  std::vector<std::string> lines(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::vector<char> fallback(corpus.size(), 0);
  const auto count = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      SamplePlan p = plan;
      p.rng_seed = derive_seed(seed, std::string_view(corpus[k].id));
      const TrainingInstance inst = make_training_instance(parse(corpus[k].latex), p);
      fallback[k] = inst.coverage_fallback ? 1 : 0;
      lines[k] = to_json(emit_render_manifest(inst, corpus[k].id, a.height, a.width));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  Output out(a.manifests);
  std::size_t fallbacks = 0, skipped = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    if (errors[k]) {
      if (!a.lenient) {
        std::cerr << "record '" << corpus[k].id << "':\n";
        std::rethrow_exception(errors[k]);
      }
      try {
        std::rethrow_exception(errors[k]);
      } catch (const std::exception& e) {
        warn("record '" + corpus[k].id + "': " + e.what() + " (skipped)");
      }
      ++skipped;
      continue;
    }
    if (fallback[k]) {
      ++fallbacks;
      warn("record '" + corpus[k].id + "': coverage target not reachable, using whole formula");
    }
    out.stream() << lines[k] << '\n';
  }
  info("decomposed " + std::to_string(corpus.size() - skipped) + " record(s), " +
       std::to_string(fallbacks) + " coverage fallback(s)");
  return kOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& pred, const std::string& rules_path, bool fair, bool nonfair,
             const std::string& report, bool lenient) {
  EvalLoadResult loaded = load_eval_samples(pred);
  for (const Diagnostic& d : loaded.diagnostics) {
    const std::string msg = pred + ":" + std::to_string(d.line) + ": " +
                            (d.field.empty() ? "" : d.field + ": ") + d.message;
    if (!lenient) throw SchemaError(msg);
    warn(msg + " (skipped)");
  }
  std::stable_sort(loaded.samples.begin(), loaded.samples.end(),
                   [](const EvalSample& a, const EvalSample& b) { return a.id < b.id; });
  const EquivalenceRuleSet rules =
      rules_path.empty() ? EquivalenceRuleSet::with_builtins() : EquivalenceRuleSet::load(rules_path);
  if (!fair && !nonfair) fair = nonfair = true;
  const EvalReport result = evaluate_corpus(loaded.samples, rules);
  Output out(report);
  out.stream() << to_json(result, nonfair, fair) << '\n';
  std::size_t fallbacks = 0;
  for (const auto& s : result.per_sample) fallbacks += (s.fair.fallback || s.nonfair.fallback);
  if (fallbacks > 0) {
    warn(std::to_string(fallbacks) + " sample(s) were scored on raw strings (did not tokenize)");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(std::size_t count, const std::string& level, const std::string& lines_range,
              int max_chars, bool plain, const std::string& out_path, std::uint64_t seed) {
  SynthCorpusSpec spec;
  spec.count = count;
  std::tie(spec.min_level, spec.max_level) = parse_range(level, "--level");
  std::tie(spec.min_lines, spec.max_lines) = parse_range(lines_range, "--lines");
  spec.max_chars = max_chars;
  spec.rng_seed = seed;
  spec.loose_surface = !plain;
  spec.aliases = !plain;
  const std::vector<CorpusRecord> corpus = synth_corpus(spec);
  Output out(out_path);
  write_corpus(out.stream(), corpus);
  info("synthesized " + std::to_string(corpus.size()) + " formula(s)");
  return kOk;
}

// ---------------------------------------------------------------------------
// toy-train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, mode = "hybrid", curve, checkpoint;
  int epochs = 50, n = 4, dim = 32, batch_size = 2;
  double lr = 0.05, alpha = 0.2, theta = 0.7, lambda = 0.3;
  bool lenient = false;
};

int cmd_toy_train(const TrainArgs& a, std::uint64_t seed) {
  const auto mode = parse_crop_mode(a.mode);
  if (!mode) throw CLI::ValidationError("--mode", "unknown crop mode '" + a.mode + "'");
  std::vector<CorpusRecord> corpus = load_checked(a.corpus, a.lenient);
  sort_by_id(corpus);

  SamplePlan plan;
  plan.mode = *mode;
  plan.coverage_theta = a.theta;
  plan.lambda_percent = a.lambda;
  plan.rng_seed = seed;
  FusionConfig fusion{a.alpha, a.n};
  TrainConfig train;
  train.epochs = a.epochs;
  train.lr = a.lr;
  train.batch_size = a.batch_size;
  train.dim = a.dim;
  train.seed = seed;

  const TrainResult result = toy_train(corpus, plan, fusion, train);
  Output out(a.curve);
  write_curve_csv(out.stream(), result.curve);
  if (!a.checkpoint.empty()) save_checkpoint(a.checkpoint, result.params, result.vocab);
  const double first = result.curve.front().mean_total_loss;
  const double last = result.curve.back().mean_total_loss;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s: epoch 1 loss %.4f, epoch %d loss %.4f (%.1f%%)",
                to_string(*mode), first, result.curve.back().epoch, last, 100.0 * last / first);
  info(buf);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical formula toolkit: parse, decompose, evaluate, synthesize, toy-train"};
  app.require_subcommand(1);
  std::uint64_t seed = kDefaultSeed;
  std::string log_level = "info";
  app.add_option("--seed", seed, "Random seed for randomized subcommands")->capture_default_str();
  app.add_option("--log-level", log_level, "error, warn or info")
      ->check(CLI::IsMember({"error", "warn", "info"}))
      ->capture_default_str();

  auto* parse_cmd = app.add_subcommand("parse", "Parse one formula and report its structure");
  std::string input, expr;
  bool as_json = false;
  auto* input_opt = parse_cmd->add_option("--input", input, "File holding one formula");
  auto* expr_opt = parse_cmd->add_option("--expr", expr, "Formula text");
  input_opt->excludes(expr_opt);
  parse_cmd->add_flag("--json", as_json, "Print JSON instead of a tree");

  auto* stats_cmd = app.add_subcommand("stats", "Level x line-bin x domain statistics");
  std::string stats_corpus, stats_csv;
  bool stats_lenient = false;
  stats_cmd->add_option("--corpus", stats_corpus, "Corpus JSONL")->required();
  stats_cmd->add_option("--csv", stats_csv, "Write the CSV here and print the grid");
  stats_cmd->add_flag("--lenient", stats_lenient, "Skip malformed lines with a warning");

  auto* dec_cmd = app.add_subcommand("decompose", "Emit render manifests for training instances");
  DecomposeArgs dec;
  dec_cmd->add_option("--corpus", dec.corpus, "Corpus JSONL")->required();
  dec_cmd->add_option("--mode", dec.mode, "no-crop, full-random-crop, full-subformula-crop, hybrid")
      ->capture_default_str();
  dec_cmd->add_option("--n", dec.n, "Sub-formulas per instance")->capture_default_str();
  dec_cmd->add_option("--theta", dec.theta, "Coverage fraction")->capture_default_str();
  dec_cmd->add_option("--lambda", dec.lambda, "Random-crop probability in hybrid mode")
      ->capture_default_str();
  dec_cmd->add_option("--manifests", dec.manifests, "Output JSONL (default stdout)");
  dec_cmd->add_option("--height", dec.height)->capture_default_str();
  dec_cmd->add_option("--width", dec.width)->capture_default_str();
  dec_cmd->add_flag("--lenient", dec.lenient, "Skip bad lines and unparsable records");
  dec_cmd->add_option("--seed", seed, "Random seed");

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against multi-label references");
  std::string pred, rules_path, report;
  bool fair = false, nonfair = false, both = false, eval_lenient = false;
  eval_cmd->add_option("--pred", pred, "JSONL of {id, prediction, labels}")->required();
  eval_cmd->add_option("--rules", rules_path, "Equivalence rule file (default: builtins)");
  auto* f1 = eval_cmd->add_flag("--fair", fair, "Report the fair block only");
  auto* f2 = eval_cmd->add_flag("--nonfair", nonfair, "Report the non-fair block only");
  auto* f3 = eval_cmd->add_flag("--both", both, "Report both blocks (default)");
  f1->excludes(f2)->excludes(f3);
  f2->excludes(f3);
  eval_cmd->add_option("--report", report, "Output JSON (default stdout)");
  eval_cmd->add_flag("--lenient", eval_lenient, "Skip malformed lines with a warning");

  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a random formula corpus");
  std::size_t count = 100;
  std::string level = "1", lines = "1", synth_out;
  int max_chars = 512;
  bool plain = false;
  synth_cmd->add_option("--count", count)->capture_default_str();
  synth_cmd->add_option("--level", level, "N or A-B")->capture_default_str();
  synth_cmd->add_option("--lines", lines, "N or A-B")->capture_default_str();
  synth_cmd->add_option("--max-chars", max_chars)->capture_default_str();
  synth_cmd->add_flag("--plain", plain, "Canonical surface forms only (no aliases)");
  synth_cmd->add_option("--out", synth_out, "Output JSONL (default stdout)");
  synth_cmd->add_option("--seed", seed, "Random seed");

  auto* train_cmd = app.add_subcommand("toy-train", "Train the stand-in encoder/decoder");
  TrainArgs tr;
  train_cmd->add_option("--corpus", tr.corpus, "Corpus JSONL")->required();
  train_cmd->add_option("--mode", tr.mode)->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--alpha", tr.alpha)->capture_default_str();
  train_cmd->add_option("--n", tr.n)->capture_default_str();
  train_cmd->add_option("--theta", tr.theta)->capture_default_str();
  train_cmd->add_option("--lambda", tr.lambda)->capture_default_str();
  train_cmd->add_option("--dim", tr.dim)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
  train_cmd->add_option("--curve", tr.curve, "Loss-curve CSV (default stdout)");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Write final parameters here");
  train_cmd->add_flag("--lenient", tr.lenient, "Skip malformed lines with a warning");
  train_cmd->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  g_log = log_level == "error" ? LogLevel::Error
          : log_level == "warn" ? LogLevel::Warn
                                : LogLevel::Info;

  try {
    if (*parse_cmd) {
      if (!*input_opt && !*expr_opt) throw CLI::RequiredError("--input or --expr");
      return cmd_parse(input, expr, static_cast<bool>(*input_opt), as_json);
    }
    if (*stats_cmd) return cmd_stats(stats_corpus, stats_csv, stats_lenient);
    if (*dec_cmd) {
      info("seed " + std::to_string(seed));
      return cmd_decompose(dec, seed);
    }
    if (*eval_cmd) return cmd_eval(pred, rules_path, fair, nonfair, report, eval_lenient);
    if (*synth_cmd) {
      info("seed " + std::to_string(seed));
      return cmd_synth(count, level, lines, max_chars, plain, synth_out, seed);
    }
    if (*train_cmd) {
      info("seed " + std::to_string(seed));
      return cmd_toy_train(tr, seed);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const InfeasibleSpec& e) {
    std::cerr << "error: infeasible spec: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const CorpusIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const RuleFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const NonTerminatingRule& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const EmptyCorpus& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const EmptyLabel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

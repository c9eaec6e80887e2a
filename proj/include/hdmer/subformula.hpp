#pragma once

// Sub-formula decomposition and training-instance construction.
//
// A formula is split into structurally meaningful pieces (groups, fraction
// arguments, matrix cells, operator-delimited runs, ...). A few of them are
// sampled so that together they cover most of the formula's characters; the
// alternative is a label-free random crop of the source tokens.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hdmer/latex.hpp"

namespace hdmer {

/// A renderable subtree of a formula.
///
/// `node_path` addresses the node from the root sequence. Child indices:
/// sequences/groups/commands by position, Script base=0 sub=1 sup=2,
/// Frac numerator=0 denominator=1, Radical degree=0 radicand=1,
/// Environment cell [row, col] (a row alone is [row]).
/// Runs of the root sequence have an empty path and a half-open `span`.
struct SubFormula {
  std::vector<std::size_t> node_path;
  std::optional<std::pair<std::size_t, std::size_t>> span;
  std::string latex;
  int char_count = 0;

  bool operator==(const SubFormula&) const = default;
};

std::vector<SubFormula> enumerate_subformulas(const FormulaAst& ast, int min_chars = 1);

struct SampleResult {
  std::vector<SubFormula> parts;
  // No subset of at most n candidates reached the coverage target; `parts`
  // holds the whole formula instead.
  bool coverage_fallback = false;
};

/// Smallest integer character total that satisfies sum >= theta * c.
int coverage_target(int total_chars, double theta);

SampleResult sample_subformulas(const FormulaAst& ast, int n, double theta,
                                std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Random crops
// ---------------------------------------------------------------------------

class TooShort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Half-open window [token_start, token_end) over the significant tokens.
struct CropSpec {
  std::size_t token_start = 0;
  std::size_t token_end = 0;
  double fraction = 0.0;  // window tokens / total tokens, after rebalancing
  std::string latex;      // source slice covered by the window

  bool operator==(const CropSpec&) const = default;
};

/// Throws TooShort when the formula has fewer than two significant tokens.
CropSpec random_crop(const FormulaAst& ast, std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Training instances
// ---------------------------------------------------------------------------

enum class CropMode { NoCrop, FullRandomCrop, FullSubFormulaCrop, Hybrid };

const char* to_string(CropMode mode);
std::optional<CropMode> parse_crop_mode(std::string_view name);

struct SamplePlan {
  CropMode mode = CropMode::Hybrid;
  int n = 4;
  double coverage_theta = 0.7;
  double lambda_percent = 0.3;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  /// Probability that an instance uses random crops under this mode.
  double effective_lambda() const;
};

enum class PartKind { None, SubFormulaCrop, RandomCrop };

using Part = std::variant<SubFormula, CropSpec>;

struct TrainingInstance {
  FormulaAst main;
  std::vector<Part> parts;
  PartKind part_kind = PartKind::None;
  std::vector<bool> labels_available;
  bool coverage_fallback = false;
};

const std::string& part_latex(const Part& part);

TrainingInstance make_training_instance(const FormulaAst& ast, const SamplePlan& plan);

struct ManifestEntry {
  std::string latex;
  std::string role;  // main | sub | crop
  int height = 448;
  int width = 448;
};

struct RenderManifest {
  std::string instance_id;
  std::vector<ManifestEntry> entries;
};

RenderManifest emit_render_manifest(const TrainingInstance& instance,
                                    const std::string& instance_id, int height = 448,
                                    int width = 448);

/// One-line JSON object.
std::string to_json(const RenderManifest& manifest);

}  // namespace hdmer

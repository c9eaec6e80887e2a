#pragma once

// Formula corpora: JSONL loading with line-addressed diagnostics,
// level x line-bin x domain statistics, and a seeded formula synthesizer
// that hits a requested hierarchical level and line count exactly.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hdmer {

enum class Domain { Math, Stat, Phy, QFin, QBio, Econ, Eess, Cs };

inline constexpr std::array<Domain, 8> kDomains = {Domain::Math, Domain::Stat, Domain::Phy,
                                                   Domain::QFin, Domain::QBio, Domain::Econ,
                                                   Domain::Eess, Domain::Cs};

const char* to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view name);

enum class DisplayMode { Inline, Display };

const char* to_string(DisplayMode m);
std::optional<DisplayMode> parse_display_mode(std::string_view name);

struct CorpusRecord {
  std::string id;
  Domain domain = Domain::Math;
  std::string latex;
  std::vector<std::string> labels;
  DisplayMode display_mode = DisplayMode::Inline;

  bool operator==(const CorpusRecord&) const = default;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based
  std::string field;
  std::string message;
};

struct LoadResult {
  std::vector<CorpusRecord> records;
  std::vector<Diagnostic> diagnostics;
};

class CorpusIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a JSONL corpus. Malformed lines are reported in `diagnostics`
/// and skipped; valid lines are kept in file order.
LoadResult read_corpus(std::istream& in);
LoadResult load_corpus(const std::filesystem::path& path);

std::string to_jsonl(const CorpusRecord& record);
void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records);
void save_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

enum class LevelGroup { L1to2, L3to5, L6to7 };
enum class LineBin { A, B, C, D };

inline constexpr std::array<LevelGroup, 3> kLevelGroups = {LevelGroup::L1to2, LevelGroup::L3to5,
                                                           LevelGroup::L6to7};
inline constexpr std::array<LineBin, 4> kLineBins = {LineBin::A, LineBin::B, LineBin::C,
                                                     LineBin::D};

const char* to_string(LevelGroup g);  // "[1-2]" ...
const char* to_string(LineBin b);     // "A" ...
std::optional<LevelGroup> level_group(int level);
std::optional<LineBin> line_bin(int lines);

struct StatTable {
  std::array<std::array<std::array<long, 8>, 4>, 3> counts{};
  long overflow = 0;                       // records outside levels 1-7 / lines 1-51
  std::vector<std::string> overflow_ids;

  long& at(LevelGroup g, LineBin b, Domain d);
  long at(LevelGroup g, LineBin b, Domain d) const;
  long total() const;

  bool operator==(const StatTable& other) const { return counts == other.counts; }
};

StatTable stat_table(const std::vector<CorpusRecord>& corpus);

/// CSV with header level_group,line_bin,domain,count and all 96 cells.
void write_stat_csv(std::ostream& out, const StatTable& table);
StatTable read_stat_csv(std::istream& in);

/// Domain rows by (level group, line bin) columns, in the published layout.
std::string format_stat_grid(const StatTable& table);

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

class InfeasibleSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SynthSpec {
  int target_level = 1;
  int target_lines = 1;
  int max_chars = 512;
  std::uint64_t rng_seed = 0;
  // Emit braces-elided and extra-whitespace surface forms.
  bool loose_surface = true;
  // Draw from render-identical aliases (\le, \dfrac, \left( ...).
  bool aliases = true;
};

void validate(const SynthSpec& spec);

/// A formula that parses with exactly the requested level and line count.
std::string synth_formula(const SynthSpec& spec);

struct SynthCorpusSpec {
  std::size_t count = 100;
  int min_level = 1;
  int max_level = 1;
  int min_lines = 1;
  int max_lines = 1;
  int max_chars = 512;
  std::uint64_t rng_seed = 0;
  bool loose_surface = true;
  bool aliases = true;
};

std::vector<CorpusRecord> synth_corpus(const SynthCorpusSpec& spec);

}  // namespace hdmer

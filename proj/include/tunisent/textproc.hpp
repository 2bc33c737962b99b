#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tunisent {

// One whitespace-delimited token with codepoint offsets into the source
// text, so source[start:end) == surface (in codepoints).
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

enum class ScriptClass { Romanized, Arabic, Mixed, Neutral };

std::string to_string(ScriptClass c);

// Whitespace-delimited segmentation. Leading/trailing punctuation splits
// into single-codepoint tokens; digits stay attached inside a word (they
// transcribe Arabic sounds). Never yields an empty surface.
std::vector<Token> tokenize(std::string_view text);

std::vector<std::string> token_surfaces(std::string_view text);

// Romanized iff the text has Latin letters and no Arabic-block codepoints,
// Arabic iff the converse, Mixed when both occur, Neutral when neither.
ScriptClass classify_script(std::string_view text);

// One row of the numeral/multigraph correspondence table: an Arabic
// codepoint with the Latin strings used for it in Tunisian and in other
// countries' chat alphabets.
struct TranslitEntry {
  std::string arabic;  // single codepoint, UTF-8 encoded
  std::vector<std::string> tunizi_variants;
  std::vector<std::string> arabizi_variants;
};

class TranslitTable {
 public:
  // Built-in table; same content ships as data/tunizi_table.tsv.
  static const TranslitTable& builtin();

  // File format: one entry per line,
  //   arabic<TAB>tunizi_variants(comma-sep)<TAB>arabizi_variants(comma-sep)
  // '#' lines are comments.
  static TranslitTable load(const std::string& path);

  explicit TranslitTable(std::vector<TranslitEntry> entries);

  const std::vector<TranslitEntry>& entries() const { return entries_; }

  // Greedy longest-match, left to right, over the Tunisian variants only
  // (case-insensitive); everything else passes through untouched. This is
  // a reference/debugging utility, not part of the classification path.
  std::vector<std::string> candidates(std::string_view token) const;

 private:
  struct Rule {
    std::string variant;  // lowercase Latin
    std::string arabic;
  };

  std::vector<TranslitEntry> entries_;
  std::vector<Rule> rules_;  // sorted longest-first
};

// Convenience wrapper over TranslitTable::builtin().
std::vector<std::string> translit_candidates(std::string_view token);

}  // namespace tunisent

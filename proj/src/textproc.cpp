#include "tunisent/textproc.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tunisent/errors.hpp"
#include "tunisent/utf8.hpp"

namespace tunisent {

std::string to_string(ScriptClass c) {
  switch (c) {
    case ScriptClass::Romanized:
      return "romanized";
    case ScriptClass::Arabic:
      return "arabic";
    case ScriptClass::Mixed:
      return "mixed";
    case ScriptClass::Neutral:
      return "neutral";
  }
  return "neutral";
}

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  const auto emit = [&](std::size_t a, std::size_t b) {
    tokens.push_back(Token{
        utf8::encode(std::vector<char32_t>(cps.begin() + a, cps.begin() + b)),
        a, b});
  };
  while (i < cps.size()) {
    while (i < cps.size() && utf8::is_space(cps[i])) ++i;
    if (i >= cps.size()) break;
    std::size_t chunk_end = i;
    while (chunk_end < cps.size() && !utf8::is_space(cps[chunk_end]))
      ++chunk_end;

    std::size_t core_begin = i;
    while (core_begin < chunk_end && utf8::is_punct(cps[core_begin])) {
      emit(core_begin, core_begin + 1);
      ++core_begin;
    }
    std::size_t core_end = chunk_end;
    while (core_end > core_begin && utf8::is_punct(cps[core_end - 1]))
      --core_end;
    if (core_end > core_begin) emit(core_begin, core_end);
    for (std::size_t p = core_end; p < chunk_end; ++p) emit(p, p + 1);
    i = chunk_end;
  }
  return tokens;
}

std::vector<std::string> token_surfaces(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.surface));
  return out;
}

ScriptClass classify_script(std::string_view text) {
  bool latin = false, arabic = false;
  for (char32_t cp : utf8::decode(text)) {
    latin = latin || utf8::is_latin_letter(cp);
    arabic = arabic || utf8::is_arabic_block(cp);
    if (latin && arabic) return ScriptClass::Mixed;
  }
  if (latin) return ScriptClass::Romanized;
  if (arabic) return ScriptClass::Arabic;
  return ScriptClass::Neutral;
}

TranslitTable::TranslitTable(std::vector<TranslitEntry> entries)
    : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    for (const auto& v : e.tunizi_variants) {
      rules_.push_back(Rule{utf8::lower_ascii(v), e.arabic});
    }
  }
  std::stable_sort(rules_.begin(), rules_.end(),
                   [](const Rule& a, const Rule& b) {
                     if (a.variant.size() != b.variant.size())
                       return a.variant.size() > b.variant.size();
                     return a.variant < b.variant;
                   });
}

const TranslitTable& TranslitTable::builtin() {
  static const TranslitTable table({
      {"ح", {"7"}, {"7"}},               // ح
      {"خ", {"5", "kh"}, {"5", "7'"}},    // خ
      {"ذ", {"dh"}, {"d'", "dh"}},        // ذ
      {"ش", {"ch"}, {"$", "sh"}},         // ش
      {"ث", {"th"}, {"t'", "th", "4"}},   // ث
      {"غ", {"gh", "8"}, {"4'"}},         // غ
      {"ع", {"3"}, {"3"}},                // ع
      {"ق", {"9"}, {"8"}},                // ق
  });
  return table;
}

TranslitTable TranslitTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  std::vector<TranslitEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  const auto split_csv = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        if (!cur.empty()) parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
      if (c == '\t') {
        cols.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    cols.push_back(cur);
    if (cols.size() != 3 || cols[0].empty()) {
      throw InvalidConfig(path + ":" + std::to_string(lineno) +
                          ": expected arabic<TAB>tunizi<TAB>arabizi");
    }
    entries.push_back(
        TranslitEntry{cols[0], split_csv(cols[1]), split_csv(cols[2])});
  }
  if (entries.empty()) throw InvalidConfig(path + ": empty table");
  return TranslitTable(std::move(entries));
}

std::vector<std::string> TranslitTable::candidates(
    std::string_view token) const {
  const std::string lowered = utf8::lower_ascii(token);
  std::string out;
  std::size_t i = 0;
  while (i < token.size()) {
    const Rule* hit = nullptr;
    for (const auto& r : rules_) {
      if (lowered.compare(i, r.variant.size(), r.variant) == 0) {
        hit = &r;
        break;
      }
    }
    if (hit != nullptr) {
      out += hit->arabic;
      i += hit->variant.size();
    } else {
      out.push_back(token[i]);
      ++i;
    }
  }
  return {out};
}

std::vector<std::string> translit_candidates(std::string_view token) {
  return TranslitTable::builtin().candidates(token);
}

}  // namespace tunisent

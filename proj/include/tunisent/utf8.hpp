#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tunisent::utf8 {

// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD
// (one replacement per bad byte) so classification never throws on dirty
// social-media text.
std::vector<char32_t> decode(std::string_view text);

std::string encode(const std::vector<char32_t>& codepoints);
void append(std::string& out, char32_t cp);

// Unicode Arabic blocks: U+0600-U+06FF, U+0750-U+077F, U+08A0-U+08FF,
// U+FB50-U+FDFF, U+FE70-U+FEFF.
inline bool is_arabic_block(char32_t cp) {
  return (cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0x0750 && cp <= 0x077F) ||
         (cp >= 0x08A0 && cp <= 0x08FF) || (cp >= 0xFB50 && cp <= 0xFDFF) ||
         (cp >= 0xFE70 && cp <= 0xFEFF);
}

// Basic Latin letters plus the Latin-1/Extended ranges used by French
// loanwords (é, è, à, ç, ...).
inline bool is_latin_letter(char32_t cp) {
  if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
  if (cp >= 0x00C0 && cp <= 0x024F) return cp != 0x00D7 && cp != 0x00F7;
  return false;
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

inline bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v' || cp == 0x00A0 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x3000;
}

// ASCII punctuation/symbols plus the common typographic and Arabic marks
// seen in the comment corpora.
inline bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'!' && cp <= U'/') || (cp >= U':' && cp <= U'@') ||
           (cp >= U'[' && cp <= U'`') || (cp >= U'{' && cp <= U'~');
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00BF:  // inverted question
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x060C:  // Arabic comma
    case 0x061B:  // Arabic semicolon
    case 0x061F:  // Arabic question mark
      return true;
    default:
      break;
  }
  return cp >= 0x2010 && cp <= 0x2027;  // dashes, quotes, ellipsis
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;
  return cp;
}

std::string lower_ascii(std::string_view s);

// Trims the same whitespace set used by the tokenizer from both ends.
std::string trim(std::string_view s);

}  // namespace tunisent::utf8

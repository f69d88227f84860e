#include "sdvc/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace sdvc {

std::vector<Codepoint> decode_utf8(std::string_view text) {
  std::vector<Codepoint> out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    uint32_t cp = 0;
    size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < text.size()) {
      cp = (c & 0x1F) << 6 | (text[i + 1] & 0x3F);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < text.size()) {
      cp = (c & 0x0F) << 12 | (text[i + 1] & 0x3F) << 6 | (text[i + 2] & 0x3F);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < text.size()) {
      cp = (c & 0x07) << 18 | (text[i + 1] & 0x3F) << 12 |
           (text[i + 2] & 0x3F) << 6 | (text[i + 3] & 0x3F);
      len = 4;
    } else {
      cp = 0xFFFD;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

std::string encode_utf8(uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xF0 | (cp >> 18));
    s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

uint32_t fold_case(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 Supplement uppercase block, skipping the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x130) return 'i';  // dotted capital I
  if (cp == 0x178) return 0xFF;  // Y with diaeresis
  if (cp >= 0x100 && cp <= 0x177) {
    // Alternating upper/lower pairs; parity flips at 0x138 (kra) and
    // again at 0x149.
    if (cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A) return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  return cp;
}

namespace {

// Base letters for U+0100..U+017F (already case-folded on entry).
uint32_t latin_ext_a_base(uint32_t cp) {
  if (cp <= 0x105) return 'a';
  if (cp <= 0x10D) return 'c';
  if (cp <= 0x111) return 'd';
  if (cp <= 0x11B) return 'e';
  if (cp <= 0x123) return 'g';
  if (cp <= 0x127) return 'h';
  if (cp <= 0x131) return 'i';
  if (cp <= 0x133) return 'i';  // ij ligature
  if (cp <= 0x135) return 'j';
  if (cp <= 0x138) return 'k';
  if (cp <= 0x142) return 'l';
  if (cp <= 0x14B) return 'n';
  if (cp <= 0x153) return 'o';  // includes oe ligature
  if (cp <= 0x159) return 'r';
  if (cp <= 0x161) return 's';
  if (cp <= 0x167) return 't';
  if (cp <= 0x173) return 'u';
  if (cp <= 0x175) return 'w';
  if (cp <= 0x178) return 'y';
  if (cp <= 0x17E) return 'z';
  return 's';  // long s
}

}  // namespace

uint32_t fold_char(uint32_t cp) {
  cp = fold_case(cp);
  if (cp < 0x80) return cp;
  if (cp >= 0xE0 && cp <= 0xFF) {
    if (cp <= 0xE5) return 'a';
    if (cp == 0xE6) return 'a';  // ae ligature
    if (cp == 0xE7) return 'c';
    if (cp <= 0xEB) return 'e';
    if (cp <= 0xEF) return 'i';
    if (cp == 0xF0) return 'd';
    if (cp == 0xF1) return 'n';
    if (cp <= 0xF6) return 'o';
    if (cp == 0xF7) return cp;  // division sign
    if (cp == 0xF8) return 'o';
    if (cp <= 0xFC) return 'u';
    if (cp == 0xFD) return 'y';
    if (cp == 0xFE) return 't';  // thorn
    return 'y';
  }
  if (cp == 0xDF) return 's';  // sharp s stays lowercase under fold_case
  if (cp >= 0x100 && cp <= 0x17F) return latin_ext_a_base(cp);
  return cp;
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const Codepoint& c : decode_utf8(text)) out += encode_utf8(fold_case(c.value));
  return out;
}

std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const Codepoint& c : decode_utf8(text)) out += encode_utf8(fold_char(c.value));
  return out;
}

bool is_ascii_punct(uint32_t cp) {
  return cp < 0x80 && std::ispunct(static_cast<int>(cp));
}

bool is_word_char(uint32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
  // Non-ASCII letters; general punctuation and symbols are boundaries.
  return !(cp >= 0x2000 && cp <= 0x206F);
}

bool is_protected_token(std::string_view token) {
  if (token.size() < 3 || token.front() != '[' || token.back() != ']') return false;
  for (size_t i = 1; i + 1 < token.size(); ++i) {
    char c = token[i];
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      return false;
  }
  return true;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<Codepoint> cps = decode_utf8(text);
  size_t i = 0;
  while (i < cps.size()) {
    uint32_t cp = cps[i].value;
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r') {
      ++i;
      continue;
    }
    // Bracketed tag: emit verbatim, uppercase preserved.
    if (cp == '[') {
      size_t j = i + 1;
      while (j < cps.size() && cps[j].value < 0x80 &&
             (std::isalnum(static_cast<int>(cps[j].value)) ||
              cps[j].value == '_' || cps[j].value == '-'))
        ++j;
      if (j > i + 1 && j < cps.size() && cps[j].value == ']') {
        size_t begin = cps[i].byte_offset;
        size_t end = cps[j].byte_offset + cps[j].byte_length;
        tokens.emplace_back(text.substr(begin, end - begin));
        i = j + 1;
        continue;
      }
    }
    if (is_ascii_punct(cp)) {
      tokens.push_back(std::string(1, static_cast<char>(cp)));
      ++i;
      continue;
    }
    // Word: run of non-space, non-punct codepoints.
    std::string word;
    while (i < cps.size()) {
      uint32_t c = cps[i].value;
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || is_ascii_punct(c)) break;
      word += encode_utf8(fold_case(c));
      ++i;
    }
    if (!word.empty()) tokens.push_back(std::move(word));
  }
  return tokens;
}

bool is_punct_token(std::string_view token) {
  if (token.empty()) return false;
  for (const Codepoint& c : decode_utf8(token))
    if (!is_ascii_punct(c.value)) return false;
  return true;
}

std::string surname_of(std::string_view full_name) {
  size_t end = full_name.find_last_not_of(" \t");
  if (end == std::string_view::npos) return {};
  size_t pos = full_name.find_last_of(" \t", end);
  if (pos == std::string_view::npos) return {};
  return std::string(full_name.substr(pos + 1, end - pos));
}

size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<Codepoint> ca = decode_utf8(a), cb = decode_utf8(b);
  std::vector<size_t> prev(cb.size() + 1), cur(cb.size() + 1);
  for (size_t j = 0; j <= cb.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= ca.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= cb.size(); ++j) {
      size_t sub = prev[j - 1] + (ca[i - 1].value == cb[j - 1].value ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[cb.size()];
}

std::vector<uint32_t> fold_codepoints(std::string_view text) {
  std::vector<uint32_t> out;
  for (const Codepoint& c : decode_utf8(text)) out.push_back(fold_char(c.value));
  return out;
}

std::vector<TextSpan> find_word_occurrences(const std::vector<uint32_t>& haystack,
                                            const std::vector<uint32_t>& needle) {
  std::vector<TextSpan> spans;
  if (needle.empty() || haystack.size() < needle.size()) return spans;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (!std::equal(needle.begin(), needle.end(), haystack.begin() + i)) continue;
    bool left_ok = i == 0 || !is_word_char(haystack[i - 1]);
    size_t j = i + needle.size();
    bool right_ok = j == haystack.size() || !is_word_char(haystack[j]);
    if (left_ok && right_ok) spans.push_back({i, needle.size()});
  }
  return spans;
}

std::vector<TextSpan> protected_token_spans(const std::vector<Codepoint>& cps) {
  std::vector<TextSpan> spans;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].value != '[') continue;
    size_t j = i + 1;
    while (j < cps.size() && cps[j].value < 0x80 &&
           (std::isalnum(static_cast<int>(cps[j].value)) || cps[j].value == '_' ||
            cps[j].value == '-'))
      ++j;
    if (j > i + 1 && j < cps.size() && cps[j].value == ']') {
      spans.push_back({i, j - i + 1});
      i = j;
    }
  }
  return spans;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace sdvc

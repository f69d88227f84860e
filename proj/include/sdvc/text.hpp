#ifndef SDVC_TEXT_HPP
#define SDVC_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdvc {

// UTF-8 codepoint with its byte span in the source string.
struct Codepoint {
  uint32_t value;
  size_t byte_offset;
  size_t byte_length;
};

// Decodes UTF-8; invalid sequences are consumed byte-wise as U+FFFD.
std::vector<Codepoint> decode_utf8(std::string_view text);

std::string encode_utf8(uint32_t cp);

// Lowercase mapping covering ASCII, Latin-1 Supplement and Latin Extended-A.
uint32_t fold_case(uint32_t cp);

// Diacritic stripping to a single base letter (one-to-one), after case
// folding. Ligatures collapse to their first letter.
uint32_t fold_char(uint32_t cp);

// Case-folds a whole string (used by the tokenizer).
std::string lowercase(std::string_view text);

// Case-folds and strips diacritics; one output codepoint per input
// codepoint, so offsets line up with the input.
std::string fold(std::string_view text);

bool is_ascii_punct(uint32_t cp);

// Letter or digit under the folded alphabet; everything else is a
// word boundary.
bool is_word_char(uint32_t cp);

// True for bracketed tags of the form [Name] or [Name_id]: these pass
// through the tokenizer verbatim and are never re-matched by the
// anonymizer.
bool is_protected_token(std::string_view token);

// Splits text into tokens: lowercased words, single-character punctuation
// tokens, and protected [Tag] tokens kept verbatim.
std::vector<std::string> tokenize(std::string_view text);

// A token made of punctuation only (word statistics skip these).
bool is_punct_token(std::string_view token);

// Last whitespace-separated word of a personal name ("Kevin De Bruyne"
// -> "Bruyne"). Returns an empty string when there is no shorter form.
std::string surname_of(std::string_view full_name);

// Levenshtein distance over codepoints.
size_t edit_distance(std::string_view a, std::string_view b);

// Span expressed in codepoint indices.
struct TextSpan {
  size_t begin = 0;
  size_t length = 0;
  size_t end() const { return begin + length; }
  bool overlaps(const TextSpan& other) const {
    return begin < other.end() && other.begin < end();
  }
};

std::vector<uint32_t> fold_codepoints(std::string_view text);

// Word-boundary occurrences of `needle` in `haystack`, both already folded.
std::vector<TextSpan> find_word_occurrences(const std::vector<uint32_t>& haystack,
                                            const std::vector<uint32_t>& needle);

// Spans of bracketed [Tag] tokens (codepoint indices into `cps`).
std::vector<TextSpan> protected_token_spans(const std::vector<Codepoint>& cps);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace sdvc

#endif

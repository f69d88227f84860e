#include "doctest.h"

#include "sdvc/text.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

using namespace sdvc;

namespace {

// Exponential-time reference for edit distance, usable only on short inputs.
size_t edit_distance_recursive(const std::vector<uint32_t>& a, size_t i,
                               const std::vector<uint32_t>& b, size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return edit_distance_recursive(a, i + 1, b, j + 1);
  size_t del = edit_distance_recursive(a, i + 1, b, j);
  size_t ins = edit_distance_recursive(a, i, b, j + 1);
  size_t sub = edit_distance_recursive(a, i + 1, b, j + 1);
  return 1 + std::min({del, ins, sub});
}

std::vector<uint32_t> raw_codepoints(std::string_view s) {
  std::vector<uint32_t> out;
  for (const Codepoint& c : decode_utf8(s)) out.push_back(c.value);
  return out;
}

}  // namespace

TEST_CASE("utf8 decode/encode round trip") {
  std::string s = "N'Golo Kant\xC3\xA9 \xC3\x96zil \xE2\x9A\xBD plain";
  std::string rebuilt;
  for (const Codepoint& c : decode_utf8(s)) rebuilt += encode_utf8(c.value);
  CHECK(rebuilt == s);

  // Byte offsets partition the string.
  auto cps = decode_utf8(s);
  size_t pos = 0;
  for (const Codepoint& c : cps) {
    CHECK(c.byte_offset == pos);
    pos += c.byte_length;
  }
  CHECK(pos == s.size());
}

TEST_CASE("invalid utf8 degrades to replacement characters") {
  std::string bad = "ok\xFF\xC3";
  auto cps = decode_utf8(bad);
  REQUIRE(cps.size() == 4);
  CHECK(cps[2].value == 0xFFFD);
  CHECK(cps[3].value == 0xFFFD);
}

TEST_CASE("case and diacritic folding") {
  CHECK(fold_case(U'A') == U'a');
  CHECK(fold_case(U'z') == U'z');
  CHECK(fold("Ozil") == "ozil");
  CHECK(fold("\xC3\x96zil") == "ozil");       // Özil
  CHECK(fold("S\xC3\xA1nchez") == "sanchez"); // Sánchez
  CHECK(fold("Kant\xC3\xA9") == "kante");     // Kanté
  CHECK(fold("Ars\xC3\xA8ne") == "arsene");   // Arsène
  CHECK(fold("HAZARD") == "hazard");
  // Folding is idempotent.
  std::string once = fold("\xC5\xA0ime Vrsaljko");
  CHECK(fold(once) == once);
}

TEST_CASE("tokenize lowercases and splits punctuation") {
  auto toks = tokenize("Hazard (Chelsea) wins a corner.");
  std::vector<std::string> expect = {"hazard", "(", "chelsea", ")",
                                     "wins",   "a", "corner",  "."};
  CHECK(toks == expect);
  for (const auto& t : toks) CHECK(!t.empty());
}

TEST_CASE("tokenize keeps placeholder tokens intact") {
  auto toks = tokenize("[Player_p7] ([TEAM]) wins it, [REFEREE] agrees.");
  std::vector<std::string> expect = {"[Player_p7]", "(", "[TEAM]", ")",
                                     "wins", "it", ",", "[REFEREE]",
                                     "agrees", "."};
  CHECK(toks == expect);
}

TEST_CASE("tokenize handles numbers and apostrophes") {
  auto toks = tokenize("It's 2-0 after 45 minutes!");
  // Apostrophe is punctuation; digits group as word characters.
  std::vector<std::string> expect = {"it",    "'",  "s",       "2", "-", "0",
                                     "after", "45", "minutes", "!"};
  CHECK(toks == expect);
}

TEST_CASE("punctuation token classifier") {
  CHECK(is_punct_token("."));
  CHECK(is_punct_token("!?"));
  CHECK(!is_punct_token("corner"));
  CHECK(!is_punct_token("2"));
  CHECK(!is_punct_token("[TEAM]"));
}

TEST_CASE("is_protected_token") {
  CHECK(is_protected_token("[TEAM]"));
  CHECK(is_protected_token("[Player_p12]"));
  CHECK(is_protected_token("[COACH]"));
  CHECK(is_protected_token("[REFEREE]"));
  CHECK(!is_protected_token("[TEAM"));
  CHECK(!is_protected_token("team"));
  CHECK(!is_protected_token("[]"));
}

TEST_CASE("edit distance basics") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("oezil", "ozil") == 1);
  CHECK(edit_distance("sanchez", "sanchez") == 0);
  // Unicode-aware: one codepoint substitution, not byte-level.
  CHECK(edit_distance("kant\xC3\xA9", "kante") == 1);
}

TEST_CASE("edit distance matches recursive reference") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> len_dist(0, 7);
  std::uniform_int_distribution<int> ch_dist(0, 3);
  const char alphabet[] = {'a', 'b', 'c', 'd'};
  for (int iter = 0; iter < 300; ++iter) {
    std::string a, b;
    int la = len_dist(rng), lb = len_dist(rng);
    for (int i = 0; i < la; ++i) a += alphabet[ch_dist(rng)];
    for (int i = 0; i < lb; ++i) b += alphabet[ch_dist(rng)];
    auto ca = raw_codepoints(a);
    auto cb = raw_codepoints(b);
    CHECK(edit_distance(a, b) == edit_distance_recursive(ca, 0, cb, 0));
  }
}

TEST_CASE("surname extraction") {
  CHECK(surname_of("Eden Hazard") == "Hazard");
  CHECK(surname_of("Kevin De Bruyne") == "Bruyne");
  CHECK(surname_of("N'Golo Kant\xC3\xA9") == "Kant\xC3\xA9");
  CHECK(surname_of("Pedro") == "");
  CHECK(surname_of("") == "");
  CHECK(surname_of("  Mesut  \xC3\x96zil  ") == "\xC3\x96zil");
}

TEST_CASE("word occurrence search respects boundaries") {
  auto hay = fold_codepoints("Real Madrid really dominate; real chance for Real.");
  auto hits = find_word_occurrences(hay, fold_codepoints("real"));
  // "really" must not match; the standalone real/Real occurrences do.
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].begin == 0);

  auto multi = find_word_occurrences(hay, fold_codepoints("real madrid"));
  REQUIRE(multi.size() == 1);
  CHECK(multi[0].begin == 0);
  CHECK(multi[0].length == 11);
}

TEST_CASE("protected token spans") {
  std::string text = "[TEAM] and [Player_p4] march on";
  auto cps = decode_utf8(text);
  auto spans = protected_token_spans(cps);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].begin == 0);
  CHECK(spans[0].length == 6);
  CHECK(spans[1].begin == 11);
  CHECK(spans[1].length == 11);  // [Player_p4]
  CHECK(!spans[0].overlaps(spans[1]));
}

TEST_CASE("join tokens") {
  CHECK(join_tokens({"a", "b", "c"}) == "a b c");
  CHECK(join_tokens({}) == "");
}

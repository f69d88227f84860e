#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace sdvc {

// Token-id mapping with fixed specials at the front:
//   0 <PAD>  1 <BOS>  2 <EOS>  3 <UNK>  4 [TEAM]  5 [COACH]  6 [REFEREE]  7 [PLAYER]
// Corpus tokens follow, ordered by descending frequency then lexicographically.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocabulary();

  // Tokens with frequency below min_count map to <UNK>.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences,
                          int min_count = 5);

  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  int size() const { return int(tokens_.size()); }

  std::vector<int> encode(const std::vector<std::string>& tokens,
                          bool add_bos_eos = true) const;
  std::vector<std::string> decode(const std::vector<int>& ids,
                                  bool strip_specials = true) const;

  // Newline-delimited token list, line number = id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  // FNV-1a over the serialized token list; checkpoints store this to detect
  // vocabulary drift.
  uint64_t fingerprint() const;

 private:
  void push(std::string token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

uint64_t fnv1a(std::string_view bytes);

}  // namespace sdvc

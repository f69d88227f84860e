#include "sdvc/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sdvc {

namespace {

const std::vector<std::string>& specials() {
  static const std::vector<std::string> s = {"<PAD>",  "<BOS>",   "<EOS>",
                                             "<UNK>",  "[TEAM]",  "[COACH]",
                                             "[REFEREE]", "[PLAYER]"};
  return s;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const std::string& s : specials()) push(s);
}

void Vocabulary::push(std::string token) {
  index_.emplace(token, int(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& sentences, int min_count) {
  std::map<std::string, long> counts;
  for (const auto& sent : sentences)
    for (const std::string& tok : sent) ++counts[tok];

  Vocabulary vocab;
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, n] : counts) {
    if (n < min_count) continue;
    if (vocab.index_.count(tok)) continue;  // specials stay at fixed ids
    kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (auto& [tok, n] : kept) vocab.push(std::move(tok));
  return vocab;
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw std::out_of_range("token id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(size()));
  return tokens_[id];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens,
                                    bool add_bos_eos) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 2);
  if (add_bos_eos) ids.push_back(kBos);
  for (const std::string& tok : tokens) ids.push_back(id(tok));
  if (add_bos_eos) ids.push_back(kEos);
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids,
                                            bool strip_specials) const {
  std::vector<std::string> out;
  for (int i : ids) {
    if (strip_specials && (i == kPad || i == kBos || i == kEos)) continue;
    out.push_back(token(i));
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path);
  for (const std::string& tok : tokens_) out << tok << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path);
  Vocabulary vocab;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    if (lineno < int(specials().size())) {
      if (line != specials()[lineno])
        throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                 " must be " + specials()[lineno] + ", got \"" +
                                 line + "\"");
    } else {
      if (line.empty())
        throw std::runtime_error(path + ": empty token at line " +
                                 std::to_string(lineno));
      if (vocab.index_.count(line))
        throw std::runtime_error(path + ": duplicate token \"" + line +
                                 "\" at line " + std::to_string(lineno));
      vocab.push(line);
    }
    ++lineno;
  }
  if (lineno < int(specials().size()))
    throw std::runtime_error(path + ": missing special tokens");
  return vocab;
}

uint64_t Vocabulary::fingerprint() const {
  std::ostringstream ss;
  for (const std::string& tok : tokens_) ss << tok << '\n';
  return fnv1a(ss.str());
}

uint64_t fnv1a(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sdvc

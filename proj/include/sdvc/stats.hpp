#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdvc/document.hpp"

namespace sdvc {

struct CorpusStats {
  long n_games = 0;
  long n_captions = 0;
  double captions_per_game_mean = 0.0;
  std::map<int, long> words_per_caption_histogram;  // caption length -> count
  std::map<std::string, long> word_frequency;
  int bin_seconds = 60;
  // temporal_histogram[half-1][bin] counts captions with
  // bin*bin_seconds <= t < (bin+1)*bin_seconds.
  std::vector<long> temporal_histogram[2];
  std::map<std::string, long> label_histogram;

  double words_per_caption_mean() const;
  int words_per_caption_max() const;
  long vocabulary_size() const { return long(word_frequency.size()); }
  ordered_json to_json() const;
};

// Word counts use tokenize() on the selected text version
// (0 original, 1 identified, 2 anonymized); pure-punctuation tokens
// do not count as words.
CorpusStats compute_stats(const std::vector<GameDocument>& docs,
                          int bin_seconds = 60, int text_field = 2);

}  // namespace sdvc

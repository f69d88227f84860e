#include "sdvc/stats.hpp"

#include <stdexcept>

#include "sdvc/text.hpp"

namespace sdvc {

double CorpusStats::words_per_caption_mean() const {
  long total = 0, count = 0;
  for (const auto& [len, n] : words_per_caption_histogram) {
    total += long(len) * n;
    count += n;
  }
  return count == 0 ? 0.0 : double(total) / double(count);
}

int CorpusStats::words_per_caption_max() const {
  return words_per_caption_histogram.empty()
             ? 0
             : words_per_caption_histogram.rbegin()->first;
}

ordered_json CorpusStats::to_json() const {
  ordered_json o;
  o["n_games"] = n_games;
  o["n_captions"] = n_captions;
  o["captions_per_game_mean"] = captions_per_game_mean;
  o["words_per_caption_mean"] = words_per_caption_mean();
  o["words_per_caption_max"] = words_per_caption_max();
  o["vocabulary_size"] = vocabulary_size();
  ordered_json wh = ordered_json::object();
  for (const auto& [len, n] : words_per_caption_histogram)
    wh[std::to_string(len)] = n;
  o["words_per_caption_histogram"] = std::move(wh);
  o["bin_seconds"] = bin_seconds;
  for (int h = 0; h < 2; ++h)
    o[h == 0 ? "temporal_histogram_half1" : "temporal_histogram_half2"] =
        temporal_histogram[h];
  ordered_json lh = ordered_json::object();
  for (const auto& [label, n] : label_histogram) lh[label] = n;
  o["label_histogram"] = std::move(lh);
  return o;
}

CorpusStats compute_stats(const std::vector<GameDocument>& docs, int bin_seconds,
                          int text_field) {
  if (bin_seconds < 1) throw std::invalid_argument("bin_seconds must be >= 1");
  CorpusStats stats;
  stats.bin_seconds = bin_seconds;
  stats.n_games = long(docs.size());
  long total_captions = 0;
  for (const GameDocument& doc : docs) {
    total_captions += long(doc.captions.size());
    for (const CaptionRecord& rec : doc.captions) {
      std::vector<std::string> toks = tokenize(rec.text(text_field));
      // Pure-punctuation tokens are not words.
      int n_words = 0;
      for (const std::string& tok : toks) {
        if (is_punct_token(tok)) continue;
        ++n_words;
        ++stats.word_frequency[tok];
      }
      ++stats.words_per_caption_histogram[n_words];
      ++stats.label_histogram[rec.label_raw.empty() ? label_to_string(rec.label)
                                                    : rec.label_raw];
      if (rec.clock.half == 1 || rec.clock.half == 2) {
        auto& hist = stats.temporal_histogram[rec.clock.half - 1];
        size_t bin = size_t(std::max(0.0, rec.clock.seconds) / bin_seconds);
        if (hist.size() <= bin) hist.resize(bin + 1, 0);
        ++hist[bin];
      }
    }
  }
  stats.n_captions = total_captions;
  stats.captions_per_game_mean =
      docs.empty() ? 0.0 : double(total_captions) / double(docs.size());
  return stats;
}

}  // namespace sdvc

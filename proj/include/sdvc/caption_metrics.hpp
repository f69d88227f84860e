#pragma once

#include <string>
#include <vector>

#include "sdvc/document.hpp"

namespace sdvc {

using TokenList = std::vector<std::string>;
using ReferenceGroup = std::vector<TokenList>;

struct ScoredPair {
  TokenList candidate;
  ReferenceGroup references;  // nonempty
};

struct PairScores {
  double bleu4 = 0.0;  // add-eps smoothed, reporting only
  double rouge_l = 0.0;
  double meteor = 0.0;
  double cider = 0.0;
};

struct MetricReport {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  double cider = 0.0;
  std::vector<PairScores> per_pair;
  // {config, corpus, per_pair}; reals rounded to 6 decimals.
  ordered_json to_json() const;
};

// Corpus-level BLEU: clipped n-gram counts summed over pairs before the
// geometric mean; brevity penalty from closest reference lengths. Unsmoothed:
// any empty n-gram precision gives 0.
double bleu(const std::vector<ScoredPair>& pairs, int max_n = 4);
double bleu_pair(const ScoredPair& pair, int max_n = 4);

// ROUGE-L F-measure with beta^2 = 1.44; max over references, mean over pairs.
double rouge_l(const std::vector<ScoredPair>& pairs);
double rouge_l_pair(const ScoredPair& pair);
size_t lcs_length(const TokenList& a, const TokenList& b);

// Two-stage alignment (exact, then stemmed), F_mean with alpha = 0.9,
// chunk penalty 0.5 * (chunks/matches)^3; max over references, mean over
// pairs.
double meteor(const std::vector<ScoredPair>& pairs);
double meteor_pair(const ScoredPair& pair);

// CIDEr-D over n = 1..4: tf-idf with document frequencies counted over the
// reference groups in corpus_refs, clipped cosine, Gaussian length penalty
// (sigma = 6), scaled by 10. The two-argument form lets windowed evaluation
// share one df table across windows.
double cider(const std::vector<ScoredPair>& pairs);
double cider(const std::vector<ScoredPair>& pairs,
             const std::vector<ReferenceGroup>& corpus_refs);
std::vector<double> cider_per_pair(const std::vector<ScoredPair>& pairs,
                                   const std::vector<ReferenceGroup>& corpus_refs);

MetricReport score_pairs(const std::vector<ScoredPair>& pairs);

// snprintf("%.6f") round-trip so reports serialize identically everywhere.
double round6(double v);

}  // namespace sdvc

#include "sdvc/caption_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "sdvc/stemmer.hpp"

namespace sdvc {

namespace {

constexpr double kBleuEps = 1e-9;
constexpr double kRougeBeta2 = 1.44;
constexpr double kMeteorAlpha = 0.9;
constexpr double kMeteorGamma = 0.5;
constexpr double kMeteorBeta = 3.0;
constexpr double kCiderSigma = 6.0;
constexpr int kCiderMaxN = 4;

void check_pairs(const std::vector<ScoredPair>& pairs, const char* metric) {
  if (pairs.empty())
    throw std::invalid_argument(std::string(metric) + ": empty pair list");
  for (const ScoredPair& p : pairs)
    if (p.references.empty())
      throw std::invalid_argument(std::string(metric) +
                                  ": pair without references");
}

// N-grams are joined with an unlikely separator so they can key a flat map.
std::map<std::string, long> ngram_counts(const TokenList& toks, int n) {
  std::map<std::string, long> counts;
  if (int(toks.size()) < n) return counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

long closest_reference_length(const ScoredPair& pair) {
  long cand = long(pair.candidate.size());
  long best = long(pair.references.front().size());
  for (const TokenList& ref : pair.references) {
    long len = long(ref.size());
    long d = std::labs(len - cand);
    long bd = std::labs(best - cand);
    if (d < bd || (d == bd && len < best)) best = len;
  }
  return best;
}

struct BleuTally {
  std::vector<long> num, den;
  long cand_len = 0, ref_len = 0;
};

void bleu_accumulate(const ScoredPair& pair, int max_n, BleuTally* t) {
  t->cand_len += long(pair.candidate.size());
  t->ref_len += closest_reference_length(pair);
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::string, long> cand = ngram_counts(pair.candidate, n);
    std::map<std::string, long> clip;
    for (const TokenList& ref : pair.references)
      for (const auto& [g, c] : ngram_counts(ref, n)) {
        long& slot = clip[g];
        slot = std::max(slot, c);
      }
    for (const auto& [g, c] : cand) {
      auto it = clip.find(g);
      if (it != clip.end()) t->num[size_t(n - 1)] += std::min(c, it->second);
    }
    t->den[size_t(n - 1)] +=
        std::max<long>(0, long(pair.candidate.size()) - n + 1);
  }
}

double bleu_from_tally(const BleuTally& t, int max_n, bool smooth) {
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) {
    double p;
    if (t.num[size_t(n)] > 0 && t.den[size_t(n)] > 0)
      p = double(t.num[size_t(n)]) / double(t.den[size_t(n)]);
    else if (smooth)
      p = kBleuEps;
    else
      return 0.0;
    log_sum += std::log(p) / max_n;
  }
  if (t.cand_len == 0) return 0.0;
  double bp = t.cand_len >= t.ref_len
                  ? 1.0
                  : std::exp(1.0 - double(t.ref_len) / double(t.cand_len));
  return bp * std::exp(log_sum);
}

}  // namespace

double bleu(const std::vector<ScoredPair>& pairs, int max_n) {
  check_pairs(pairs, "bleu");
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
  BleuTally t;
  t.num.assign(size_t(max_n), 0);
  t.den.assign(size_t(max_n), 0);
  for (const ScoredPair& pair : pairs) bleu_accumulate(pair, max_n, &t);
  return bleu_from_tally(t, max_n, false);
}

double bleu_pair(const ScoredPair& pair, int max_n) {
  BleuTally t;
  t.num.assign(size_t(max_n), 0);
  t.den.assign(size_t(max_n), 0);
  bleu_accumulate(pair, max_n, &t);
  return bleu_from_tally(t, max_n, true);
}

size_t lcs_length(const TokenList& a, const TokenList& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_pair(const ScoredPair& pair) {
  double best = 0.0;
  for (const TokenList& ref : pair.references) {
    size_t l = lcs_length(pair.candidate, ref);
    if (l == 0) continue;
    double p = double(l) / double(pair.candidate.size());
    double r = double(l) / double(ref.size());
    double f = (1.0 + kRougeBeta2) * p * r / (r + kRougeBeta2 * p);
    best = std::max(best, f);
  }
  return best;
}

double rouge_l(const std::vector<ScoredPair>& pairs) {
  check_pairs(pairs, "rouge_l");
  double sum = 0.0;
  for (const ScoredPair& pair : pairs) sum += rouge_l_pair(pair);
  return sum / double(pairs.size());
}

namespace {

struct MeteorAlignment {
  long matches = 0;
  long chunks = 0;
};

// Stage 1 matches identical tokens, stage 2 matches stems of the leftovers;
// within a stage, each candidate token takes the leftmost free reference
// token.
MeteorAlignment meteor_align(const TokenList& cand, const TokenList& ref) {
  std::vector<int> match(cand.size(), -1);
  std::vector<bool> used(ref.size(), false);
  for (size_t i = 0; i < cand.size(); ++i)
    for (size_t j = 0; j < ref.size(); ++j)
      if (!used[j] && cand[i] == ref[j]) {
        match[i] = int(j);
        used[j] = true;
        break;
      }
  std::vector<std::string> ref_stems(ref.size());
  for (size_t j = 0; j < ref.size(); ++j) ref_stems[j] = stem(ref[j]);
  for (size_t i = 0; i < cand.size(); ++i) {
    if (match[i] >= 0) continue;
    std::string cs = stem(cand[i]);
    for (size_t j = 0; j < ref.size(); ++j)
      if (!used[j] && cs == ref_stems[j]) {
        match[i] = int(j);
        used[j] = true;
        break;
      }
  }
  MeteorAlignment out;
  long prev_i = -2, prev_j = -2;
  for (size_t i = 0; i < cand.size(); ++i) {
    if (match[i] < 0) continue;
    ++out.matches;
    if (long(i) != prev_i + 1 || match[i] != prev_j + 1) ++out.chunks;
    prev_i = long(i);
    prev_j = match[i];
  }
  return out;
}

}  // namespace

double meteor_pair(const ScoredPair& pair) {
  double best = 0.0;
  for (const TokenList& ref : pair.references) {
    if (pair.candidate.empty() || ref.empty()) continue;
    MeteorAlignment a = meteor_align(pair.candidate, ref);
    if (a.matches == 0) continue;
    double p = double(a.matches) / double(pair.candidate.size());
    double r = double(a.matches) / double(ref.size());
    double f = p * r / (kMeteorAlpha * p + (1.0 - kMeteorAlpha) * r);
    double penalty =
        kMeteorGamma * std::pow(double(a.chunks) / double(a.matches), kMeteorBeta);
    best = std::max(best, f * (1.0 - penalty));
  }
  return best;
}

double meteor(const std::vector<ScoredPair>& pairs) {
  check_pairs(pairs, "meteor");
  double sum = 0.0;
  for (const ScoredPair& pair : pairs) sum += meteor_pair(pair);
  return sum / double(pairs.size());
}

namespace {

struct CiderVec {
  std::array<std::map<std::string, double>, kCiderMaxN> w;
  std::array<double, kCiderMaxN> norm = {};
  long length = 0;
};

struct DfTable {
  std::array<std::map<std::string, long>, kCiderMaxN> df;
  double log_n = 0.0;

  double idf(int n, const std::string& g) const {
    auto it = df[size_t(n)].find(g);
    long d = it == df[size_t(n)].end() ? 0 : it->second;
    return log_n - std::log(std::max<long>(1, d));
  }
};

DfTable build_df(const std::vector<ReferenceGroup>& corpus_refs) {
  DfTable t;
  for (const ReferenceGroup& group : corpus_refs) {
    std::array<std::set<std::string>, kCiderMaxN> seen;
    for (const TokenList& ref : group)
      for (int n = 0; n < kCiderMaxN; ++n)
        for (const auto& [g, c] : ngram_counts(ref, n + 1))
          seen[size_t(n)].insert(g);
    for (int n = 0; n < kCiderMaxN; ++n)
      for (const std::string& g : seen[size_t(n)]) ++t.df[size_t(n)][g];
  }
  t.log_n = std::log(double(corpus_refs.size()));
  return t;
}

CiderVec tfidf_vec(const TokenList& toks, const DfTable& table) {
  CiderVec v;
  v.length = long(toks.size());
  for (int n = 0; n < kCiderMaxN; ++n) {
    for (const auto& [g, c] : ngram_counts(toks, n + 1)) {
      double w = double(c) * table.idf(n, g);
      v.w[size_t(n)][g] = w;
      v.norm[size_t(n)] += w * w;
    }
    v.norm[size_t(n)] = std::sqrt(v.norm[size_t(n)]);
  }
  return v;
}

// Clipped cosine per n with the Gaussian length penalty.
std::array<double, kCiderMaxN> cider_sim(const CiderVec& hyp, const CiderVec& ref) {
  std::array<double, kCiderMaxN> val = {};
  double delta = double(hyp.length - ref.length);
  double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  for (int n = 0; n < kCiderMaxN; ++n) {
    double s = 0.0;
    for (const auto& [g, hw] : hyp.w[size_t(n)]) {
      auto it = ref.w[size_t(n)].find(g);
      if (it != ref.w[size_t(n)].end()) s += std::min(hw, it->second) * it->second;
    }
    if (hyp.norm[size_t(n)] > 0 && ref.norm[size_t(n)] > 0)
      s /= hyp.norm[size_t(n)] * ref.norm[size_t(n)];
    else
      s = 0.0;
    val[size_t(n)] = s * penalty;
  }
  return val;
}

}  // namespace

std::vector<double> cider_per_pair(const std::vector<ScoredPair>& pairs,
                                   const std::vector<ReferenceGroup>& corpus_refs) {
  check_pairs(pairs, "cider");
  if (corpus_refs.empty())
    throw std::invalid_argument("cider: empty reference corpus");
  DfTable table = build_df(corpus_refs);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const ScoredPair& pair : pairs) {
    CiderVec hyp = tfidf_vec(pair.candidate, table);
    std::array<double, kCiderMaxN> acc = {};
    for (const TokenList& ref : pair.references) {
      CiderVec rv = tfidf_vec(ref, table);
      std::array<double, kCiderMaxN> s = cider_sim(hyp, rv);
      for (int n = 0; n < kCiderMaxN; ++n) acc[size_t(n)] += s[size_t(n)];
    }
    double mean = 0.0;
    for (int n = 0; n < kCiderMaxN; ++n) mean += acc[size_t(n)];
    mean /= kCiderMaxN;
    mean /= double(pair.references.size());
    out.push_back(mean * 10.0);
  }
  return out;
}

double cider(const std::vector<ScoredPair>& pairs,
             const std::vector<ReferenceGroup>& corpus_refs) {
  std::vector<double> per = cider_per_pair(pairs, corpus_refs);
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / double(per.size());
}

double cider(const std::vector<ScoredPair>& pairs) {
  std::vector<ReferenceGroup> groups;
  groups.reserve(pairs.size());
  for (const ScoredPair& p : pairs) groups.push_back(p.references);
  return cider(pairs, groups);
}

MetricReport score_pairs(const std::vector<ScoredPair>& pairs) {
  check_pairs(pairs, "score_pairs");
  MetricReport report;
  report.bleu4 = bleu(pairs);
  report.rouge_l = rouge_l(pairs);
  report.meteor = meteor(pairs);
  std::vector<ReferenceGroup> groups;
  groups.reserve(pairs.size());
  for (const ScoredPair& p : pairs) groups.push_back(p.references);
  std::vector<double> cider_values = cider_per_pair(pairs, groups);
  double cider_sum = 0.0;
  report.per_pair.resize(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    report.per_pair[i].bleu4 = bleu_pair(pairs[i]);
    report.per_pair[i].rouge_l = rouge_l_pair(pairs[i]);
    report.per_pair[i].meteor = meteor_pair(pairs[i]);
    report.per_pair[i].cider = cider_values[i];
    cider_sum += cider_values[i];
  }
  report.cider = cider_sum / double(pairs.size());
  return report;
}

double round6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::strtod(buf, nullptr);
}

ordered_json MetricReport::to_json() const {
  ordered_json o;
  o["config"] = {
      {"bleu", "corpus-level, closest-reference brevity penalty, max_n 4"},
      {"rouge_l", "F-measure, beta^2 1.44, max over references"},
      {"meteor", "exact+stem alignment, alpha 0.9, gamma 0.5, beta 3"},
      {"cider", "CIDEr-D, n 1..4, sigma 6, x10"},
  };
  o["corpus"] = {
      {"bleu4", round6(bleu4)},
      {"meteor", round6(meteor)},
      {"rouge_l", round6(rouge_l)},
      {"cider", round6(cider)},
  };
  ordered_json per = ordered_json::array();
  for (const PairScores& p : per_pair)
    per.push_back({{"bleu4", round6(p.bleu4)},
                   {"meteor", round6(p.meteor)},
                   {"rouge_l", round6(p.rouge_l)},
                   {"cider", round6(p.cider)}});
  o["per_pair"] = std::move(per);
  return o;
}

}  // namespace sdvc

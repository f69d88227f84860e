#include "sdvc/sdvc_eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "sdvc/text.hpp"

namespace sdvc {

std::string caption_metric_name(CaptionMetric metric) {
  switch (metric) {
    case CaptionMetric::Bleu4: return "bleu4";
    case CaptionMetric::Meteor: return "meteor";
    case CaptionMetric::RougeL: return "rouge_l";
    default: return "cider";
  }
}

namespace {

struct HalfData {
  std::vector<const SpotPrediction*> preds;
  std::vector<const CaptionRecord*> gts;
};

// Splits one game into its two halves, keeping time order.
std::array<HalfData, 2> split_halves(const PredictionSet& preds,
                                     const std::vector<CaptionRecord>& gts) {
  std::array<HalfData, 2> halves;
  for (const SpotPrediction& s : preds.spots)
    if (s.clock.half == 1 || s.clock.half == 2)
      halves[size_t(s.clock.half - 1)].preds.push_back(&s);
  for (const CaptionRecord& r : gts)
    if (r.clock.half == 1 || r.clock.half == 2)
      halves[size_t(r.clock.half - 1)].gts.push_back(&r);
  return halves;
}

double pair_metric(const ScoredPair& pair, CaptionMetric metric) {
  switch (metric) {
    case CaptionMetric::Bleu4: return bleu_pair(pair);
    case CaptionMetric::Meteor: return meteor_pair(pair);
    case CaptionMetric::RougeL: return rouge_l_pair(pair);
    default:
      throw std::logic_error("cider is corpus-scored");
  }
}

// Per-half windowed score. corpus_refs feeds the CIDEr df table; callers
// evaluating a whole corpus share one table across halves.
double windowed_half(const HalfData& half, const SdvcConfig& cfg,
                     CaptionMetric metric,
                     const std::vector<ReferenceGroup>& corpus_refs) {
  double tol = cfg.delta_seconds / 2.0;

  if (!cfg.gt_averaged) {
    if (half.preds.empty()) return half.gts.empty() ? 1.0 : 0.0;
    std::vector<ScoredPair> pairs;      // predictions with references
    std::vector<size_t> pair_of_pred;   // index into pairs, or npos
    pair_of_pred.reserve(half.preds.size());
    for (const SpotPrediction* p : half.preds) {
      if (p->comment.empty())
        throw std::runtime_error("prediction at " + format_game_clock(p->clock) +
                                 " has no caption text");
      ScoredPair pair;
      pair.candidate = tokenize(p->comment);
      for (const CaptionRecord* g : half.gts)
        if (std::abs(g->clock.seconds - p->clock.seconds) <= tol)
          pair.references.push_back(tokenize(g->text(cfg.text_field)));
      if (pair.references.empty()) {
        pair_of_pred.push_back(size_t(-1));
      } else {
        pair_of_pred.push_back(pairs.size());
        pairs.push_back(std::move(pair));
      }
    }
    std::vector<double> scores(half.preds.size(), 0.0);
    if (!pairs.empty()) {
      if (metric == CaptionMetric::Cider) {
        std::vector<double> vals = cider_per_pair(pairs, corpus_refs);
        for (size_t i = 0; i < half.preds.size(); ++i)
          if (pair_of_pred[i] != size_t(-1)) scores[i] = vals[pair_of_pred[i]];
      } else {
        for (size_t i = 0; i < half.preds.size(); ++i)
          if (pair_of_pred[i] != size_t(-1))
            scores[i] = pair_metric(pairs[pair_of_pred[i]], metric);
      }
    }
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / double(scores.size());
  }

  // GT-averaged variant: each GT caption takes its best in-window prediction.
  if (half.gts.empty()) return half.preds.empty() ? 1.0 : 0.0;
  std::vector<ScoredPair> pairs;  // every (in-window prediction, gt) pair
  std::vector<std::vector<size_t>> pairs_of_gt(half.gts.size());
  for (size_t gi = 0; gi < half.gts.size(); ++gi) {
    const CaptionRecord* g = half.gts[gi];
    for (const SpotPrediction* p : half.preds) {
      if (p->comment.empty())
        throw std::runtime_error("prediction at " + format_game_clock(p->clock) +
                                 " has no caption text");
      if (std::abs(g->clock.seconds - p->clock.seconds) > tol) continue;
      ScoredPair pair;
      pair.candidate = tokenize(p->comment);
      pair.references.push_back(tokenize(g->text(cfg.text_field)));
      pairs_of_gt[gi].push_back(pairs.size());
      pairs.push_back(std::move(pair));
    }
  }
  std::vector<double> pair_vals(pairs.size(), 0.0);
  if (!pairs.empty()) {
    if (metric == CaptionMetric::Cider) {
      pair_vals = cider_per_pair(pairs, corpus_refs);
    } else {
      for (size_t i = 0; i < pairs.size(); ++i)
        pair_vals[i] = pair_metric(pairs[i], metric);
    }
  }
  double sum = 0.0;
  for (size_t gi = 0; gi < half.gts.size(); ++gi) {
    double best = 0.0;
    for (size_t pi : pairs_of_gt[gi]) best = std::max(best, pair_vals[pi]);
    sum += best;
  }
  return sum / double(half.gts.size());
}

std::vector<ReferenceGroup> singleton_refs(const std::vector<CaptionRecord>& gts,
                                           int text_field) {
  std::vector<ReferenceGroup> refs;
  refs.reserve(gts.size());
  for (const CaptionRecord& r : gts)
    refs.push_back({tokenize(r.text(text_field))});
  return refs;
}

double soda_half(const HalfData& half, const SdvcConfig& cfg) {
  if (half.gts.empty() && half.preds.empty()) return 1.0;
  if (half.gts.empty() || half.preds.empty()) return 0.0;
  double w = cfg.window_halfwidth;
  std::vector<std::vector<std::string>> gt_tokens, pred_tokens;
  for (const CaptionRecord* g : half.gts)
    gt_tokens.push_back(tokenize(g->text(cfg.text_field)));
  for (const SpotPrediction* p : half.preds) {
    if (p->comment.empty())
      throw std::runtime_error("prediction at " + format_game_clock(p->clock) +
                               " has no caption text");
    pred_tokens.push_back(tokenize(p->comment));
  }
  std::vector<std::vector<double>> s(half.gts.size(),
                                     std::vector<double>(half.preds.size(), 0.0));
  for (size_t i = 0; i < half.gts.size(); ++i) {
    double g0 = half.gts[i]->clock.seconds - w;
    double g1 = half.gts[i]->clock.seconds + w;
    for (size_t j = 0; j < half.preds.size(); ++j) {
      double p0 = half.preds[j]->clock.seconds - w;
      double p1 = half.preds[j]->clock.seconds + w;
      double overlap = tiou(g0, g1, p0, p1);
      if (overlap <= 0.0) continue;
      ScoredPair pair;
      pair.candidate = pred_tokens[j];
      pair.references.push_back(gt_tokens[i]);
      s[i][j] = overlap * meteor_pair(pair);
    }
  }
  double total = max_order_preserving_total(s);
  double precision = total / double(half.preds.size());
  double recall = total / double(half.gts.size());
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double tiou(double a0, double a1, double b0, double b1) {
  double inter = std::min(a1, b1) - std::max(a0, b0);
  if (inter <= 0.0) return 0.0;
  double uni = std::max(a1, b1) - std::min(a0, b0);
  return uni > 0.0 ? inter / uni : 0.0;
}

double max_order_preserving_total(const std::vector<std::vector<double>>& s) {
  size_t n = s.size();
  size_t m = n == 0 ? 0 : s[0].size();
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m + 1, 0.0));
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      dp[i][j] = std::max({dp[i - 1][j], dp[i][j - 1],
                           dp[i - 1][j - 1] + s[i - 1][j - 1]});
  return dp[n][m];
}

double windowed_metric(const PredictionSet& preds,
                       const std::vector<CaptionRecord>& gts,
                       const SdvcConfig& cfg, CaptionMetric metric) {
  std::array<HalfData, 2> halves = split_halves(preds, gts);
  std::vector<ReferenceGroup> corpus_refs = singleton_refs(gts, cfg.text_field);
  double sum = 0.0;
  for (const HalfData& half : halves)
    sum += windowed_half(half, cfg, metric, corpus_refs);
  return sum / 2.0;
}

double soda_c_windowed(const PredictionSet& preds,
                       const std::vector<CaptionRecord>& gts,
                       const SdvcConfig& cfg) {
  std::array<HalfData, 2> halves = split_halves(preds, gts);
  return (soda_half(halves[0], cfg) + soda_half(halves[1], cfg)) / 2.0;
}

SdvcReport evaluate_sdvc(const std::map<std::string, PredictionSet>& preds,
                         const std::map<std::string, std::vector<CaptionRecord>>& gts,
                         const SdvcConfig& cfg,
                         const std::vector<double>& tolerances,
                         const std::vector<double>& deltas) {
  for (const auto& [game, set] : preds)
    if (!gts.count(game))
      throw std::runtime_error("predictions for unknown game \"" + game + "\"");

  SdvcReport report;
  static const PredictionSet kEmpty;
  auto preds_of = [&](const std::string& game) -> const PredictionSet& {
    auto it = preds.find(game);
    return it == preds.end() ? kEmpty : it->second;
  };

  // Spotting mAP over anchors.
  std::map<std::string, std::vector<SpotPrediction>> spot_preds;
  std::map<std::string, std::vector<GameClock>> spot_gts;
  for (const auto& [game, records] : gts) {
    std::vector<GameClock> clocks;
    for (const CaptionRecord& r : records) clocks.push_back(r.clock);
    spot_gts.emplace(game, std::move(clocks));
    spot_preds.emplace(game, preds_of(game).spots);
  }
  report.map_at = map_at_deltas(spot_preds, spot_gts, tolerances, cfg.spotting);

  // Shared CIDEr df table: one document per GT caption across the corpus.
  std::vector<ReferenceGroup> corpus_refs;
  for (const auto& [game, records] : gts)
    for (const CaptionRecord& r : records)
      corpus_refs.push_back({tokenize(r.text(cfg.text_field))});

  const CaptionMetric kMetrics[] = {CaptionMetric::Bleu4, CaptionMetric::Meteor,
                                    CaptionMetric::RougeL, CaptionMetric::Cider};
  for (const auto& [game, records] : gts) {
    std::array<HalfData, 2> halves = split_halves(preds_of(game), records);
    ordered_json game_json;
    for (double delta : deltas) {
      SdvcConfig dcfg = cfg;
      dcfg.delta_seconds = delta;
      for (CaptionMetric metric : kMetrics) {
        double sum = 0.0;
        for (const HalfData& half : halves)
          sum += windowed_half(half, dcfg, metric, corpus_refs);
        double score = sum / 2.0;
        report.windowed[delta][caption_metric_name(metric)] += score;
        game_json["windowed"][std::to_string(int(delta))]
                 [caption_metric_name(metric)] = round6(score);
      }
    }
    double soda = (soda_half(halves[0], cfg) + soda_half(halves[1], cfg)) / 2.0;
    report.soda_c += soda;
    game_json["soda_c"] = round6(soda);
    for (double tol : tolerances) {
      auto it = spot_preds.find(game);
      double ap = average_precision(it->second, spot_gts.at(game), tol,
                                    cfg.spotting);
      game_json["ap"][std::to_string(int(tol))] = round6(ap);
    }
    report.per_game[game] = std::move(game_json);
  }
  double n_games = double(std::max<size_t>(1, gts.size()));
  for (auto& [delta, metrics] : report.windowed)
    for (auto& [name, value] : metrics) value /= n_games;
  report.soda_c /= n_games;

  report.config_echo = {
      {"delta_seconds", deltas},
      {"tolerances", tolerances},
      {"window_halfwidth", cfg.window_halfwidth},
      {"gt_averaged", cfg.gt_averaged},
      {"text_field", cfg.text_field},
      {"half_window_matching", cfg.spotting.half_window},
      {"all_point_interpolation", cfg.spotting.all_point_interpolation},
  };
  return report;
}

ordered_json SdvcReport::to_json() const {
  ordered_json o;
  o["config"] = config_echo;
  ordered_json map_json = ordered_json::object();
  double mean = 0.0;
  for (const auto& [tol, v] : map_at) {
    map_json[std::to_string(int(tol))] = round6(v);
    mean += v;
  }
  o["spotting"] = {{"map_at", std::move(map_json)},
                   {"map_mean", round6(map_at.empty() ? 0.0 : mean / map_at.size())}};
  ordered_json win = ordered_json::object();
  for (const auto& [delta, metrics] : windowed) {
    ordered_json m = ordered_json::object();
    for (const auto& [name, value] : metrics) m[name] = round6(value);
    win[std::to_string(int(delta))] = std::move(m);
  }
  o["captioning"] = {{"windowed", std::move(win)}, {"soda_c", round6(soda_c)}};
  o["per_game"] = per_game;
  return o;
}

}  // namespace sdvc

#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdvc/caption_metrics.hpp"
#include "sdvc/document.hpp"
#include "sdvc/temporal_eval.hpp"

namespace sdvc {

struct SdvcConfig {
  double delta_seconds = 30.0;     // caption matching tolerance
  double window_halfwidth = 15.0;  // SODA interval half-width around anchors
  bool gt_averaged = false;        // average over GT captions instead of predictions
  int text_field = 2;              // GT reference text: 2 = anonymized
  MatchOptions spotting;           // mAP matching options
};

enum class CaptionMetric { Bleu4, Meteor, RougeL, Cider };

std::string caption_metric_name(CaptionMetric metric);

// Windowed @delta score for one game. Each generated caption is scored
// against every GT caption within |dt| <= delta/2 in the same half
// (multi-reference); captions with an empty reference set score 0. A half
// with no predictions scores 0 when it has GT and 1 when both sides are
// empty. The game score is the mean of its two halves.
double windowed_metric(const PredictionSet& preds,
                       const std::vector<CaptionRecord>& gts,
                       const SdvcConfig& cfg, CaptionMetric metric);

// Maximum-total-score order-preserving one-to-one matching (rows and columns
// both time-ordered); s[i][j] >= 0.
double max_order_preserving_total(const std::vector<std::vector<double>>& s);

double tiou(double a0, double a1, double b0, double b1);

// Tolerance-adapted SODA for one game: anchors expand to [t-w, t+w],
// s(i,j) = tIoU x METEOR, DP matching per half, F-measure of
// precision = total/|preds| and recall = total/|gts|; halves average into
// the game score. Both sides empty -> 1.
double soda_c_windowed(const PredictionSet& preds,
                       const std::vector<CaptionRecord>& gts,
                       const SdvcConfig& cfg);

struct SdvcReport {
  std::map<double, double> map_at;  // spotting tolerance -> mAP
  // delta -> {bleu4, meteor, rouge_l, cider} at that tolerance
  std::map<double, std::map<std::string, double>> windowed;
  double soda_c = 0.0;
  ordered_json per_game = ordered_json::object();
  ordered_json config_echo = ordered_json::object();
  ordered_json to_json() const;
};

// Full task evaluation: spotting mAP at `tolerances`, windowed caption
// metrics at each value in `deltas`, and SODA_c. Every predicted game must
// exist in the ground truth; GT games without predictions count as empty.
SdvcReport evaluate_sdvc(const std::map<std::string, PredictionSet>& preds,
                         const std::map<std::string, std::vector<CaptionRecord>>& gts,
                         const SdvcConfig& cfg,
                         const std::vector<double>& tolerances,
                         const std::vector<double>& deltas);

}  // namespace sdvc

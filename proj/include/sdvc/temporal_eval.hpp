#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdvc/clock.hpp"
#include "sdvc/document.hpp"

namespace sdvc {

struct SpotPrediction {
  GameClock clock;
  double confidence = 1.0;
  std::string comment;  // optional generated caption
};

struct PredictionSet {
  std::string game_id;
  std::vector<SpotPrediction> spots;  // sorted by clock
};

// Keeps the highest-confidence spot (ties: earlier clock) and drops every
// other spot within ±window_seconds in the same half; repeats until stable.
// Output is sorted by clock and idempotent under re-application.
std::vector<SpotPrediction> nms(std::vector<SpotPrediction> spots,
                                double window_seconds);

struct MatchOptions {
  // |dt| <= delta/2 when true (window of total size delta centered on the
  // ground truth); |dt| <= delta when false.
  bool half_window = true;
  // All-point precision-recall interpolation when true, 11-point otherwise.
  bool all_point_interpolation = true;
};

// Greedy one-to-one matching in descending confidence order; each prediction
// takes the nearest unmatched ground truth within tolerance (distance ties
// toward the earlier ground truth). Both lists empty -> 1; predictions
// against no ground truth -> 0.
double average_precision(std::vector<SpotPrediction> preds,
                         const std::vector<GameClock>& gts, double delta,
                         const MatchOptions& opts = {});

// Macro average: AP per game, mean over games, per delta. Every predicted
// game must exist in the ground truth.
std::map<double, double> map_at_deltas(
    const std::map<std::string, std::vector<SpotPrediction>>& preds,
    const std::map<std::string, std::vector<GameClock>>& gts,
    const std::vector<double>& deltas, const MatchOptions& opts = {});

// Prediction file: {"game_id": ..., "predictions": [{"gameTime": "H - MM:SS",
// "confidence": real, "comment"?: string}]}.
PredictionSet parse_prediction_set(std::string_view bytes);
PredictionSet load_prediction_set(const std::string& path);
ordered_json prediction_set_to_json(const PredictionSet& set);
void save_prediction_set(const std::string& path, const PredictionSet& set);

}  // namespace sdvc

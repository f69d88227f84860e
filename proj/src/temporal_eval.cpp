#include "sdvc/temporal_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sdvc {

namespace {

bool by_clock(const SpotPrediction& a, const SpotPrediction& b) {
  return a.clock < b.clock;
}

// Confidence descending, earlier clock first on ties.
bool by_confidence(const SpotPrediction& a, const SpotPrediction& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.clock < b.clock;
}

}  // namespace

std::vector<SpotPrediction> nms(std::vector<SpotPrediction> spots,
                                double window_seconds) {
  if (window_seconds <= 0)
    throw std::invalid_argument("nms window must be positive");
  std::stable_sort(spots.begin(), spots.end(), by_confidence);
  std::vector<SpotPrediction> kept;
  for (SpotPrediction& s : spots) {
    bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const SpotPrediction& k) {
          return clock_distance(k.clock, s.clock) <= window_seconds;
        });
    if (!suppressed) kept.push_back(std::move(s));
  }
  std::sort(kept.begin(), kept.end(), by_clock);
  return kept;
}

double average_precision(std::vector<SpotPrediction> preds,
                         const std::vector<GameClock>& gts, double delta,
                         const MatchOptions& opts) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  if (gts.empty()) return preds.empty() ? 1.0 : 0.0;
  if (preds.empty()) return 0.0;
  double tol = opts.half_window ? delta / 2.0 : delta;

  std::stable_sort(preds.begin(), preds.end(), by_confidence);
  std::vector<bool> used(gts.size(), false);
  std::vector<bool> tp(preds.size(), false);
  for (size_t i = 0; i < preds.size(); ++i) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < gts.size(); ++j) {
      if (used[j]) continue;
      double d = clock_distance(preds[i].clock, gts[j]);
      if (d > tol) continue;
      if (d < best_dist || (d == best_dist && best >= 0 && gts[j] < gts[best])) {
        best = int(j);
        best_dist = d;
      }
    }
    if (best >= 0) {
      used[best] = true;
      tp[i] = true;
    }
  }

  size_t n = preds.size();
  std::vector<double> precision(n), recall(n);
  long hits = 0;
  for (size_t i = 0; i < n; ++i) {
    if (tp[i]) ++hits;
    precision[i] = double(hits) / double(i + 1);
    recall[i] = double(hits) / double(gts.size());
  }
  for (size_t i = n - 1; i-- > 0;)
    precision[i] = std::max(precision[i], precision[i + 1]);

  if (opts.all_point_interpolation) {
    double ap = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (tp[i]) ap += precision[i] / double(gts.size());
    return ap;
  }
  double sum = 0.0;
  for (int r = 0; r <= 10; ++r) {
    double level = r / 10.0;
    double best = 0.0;
    for (size_t i = 0; i < n; ++i)
      if (recall[i] >= level - 1e-12) {
        best = precision[i];  // interpolated precision is non-increasing
        break;
      }
    sum += best;
  }
  return sum / 11.0;
}

std::map<double, double> map_at_deltas(
    const std::map<std::string, std::vector<SpotPrediction>>& preds,
    const std::map<std::string, std::vector<GameClock>>& gts,
    const std::vector<double>& deltas, const MatchOptions& opts) {
  if (deltas.empty()) throw std::invalid_argument("deltas must be nonempty");
  for (const auto& [game, spots] : preds)
    if (!gts.count(game))
      throw std::runtime_error("predictions for unknown game \"" + game + "\"");
  std::map<double, double> out;
  for (double delta : deltas) {
    double total = 0.0;
    for (const auto& [game, clocks] : gts) {
      auto it = preds.find(game);
      std::vector<SpotPrediction> game_preds =
          it == preds.end() ? std::vector<SpotPrediction>{} : it->second;
      total += average_precision(std::move(game_preds), clocks, delta, opts);
    }
    out[delta] = gts.empty() ? 0.0 : total / double(gts.size());
  }
  return out;
}

PredictionSet parse_prediction_set(std::string_view bytes) {
  ordered_json root;
  try {
    root = ordered_json::parse(bytes);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("prediction file: ") + e.what());
  }
  if (!root.is_object() || !root.contains("game_id") ||
      !root.contains("predictions"))
    throw std::runtime_error(
        "prediction file must be an object with game_id and predictions");
  PredictionSet set;
  set.game_id = root["game_id"].get<std::string>();
  for (const auto& p : root["predictions"]) {
    SpotPrediction spot;
    spot.clock = parse_game_clock(p.at("gameTime").get<std::string>());
    spot.confidence = p.at("confidence").get<double>();
    if (!(spot.confidence >= 0.0 && spot.confidence <= 1.0))
      throw std::runtime_error("confidence " + std::to_string(spot.confidence) +
                               " outside [0,1]");
    if (p.contains("comment")) spot.comment = p["comment"].get<std::string>();
    set.spots.push_back(std::move(spot));
  }
  std::stable_sort(set.spots.begin(), set.spots.end(), by_clock);
  return set;
}

PredictionSet load_prediction_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prediction file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_prediction_set(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ordered_json prediction_set_to_json(const PredictionSet& set) {
  ordered_json o;
  o["game_id"] = set.game_id;
  ordered_json preds = ordered_json::array();
  for (const SpotPrediction& s : set.spots) {
    ordered_json p;
    p["gameTime"] = format_game_clock(s.clock);
    p["confidence"] = s.confidence;
    if (!s.comment.empty()) p["comment"] = s.comment;
    preds.push_back(std::move(p));
  }
  o["predictions"] = std::move(preds);
  return o;
}

void save_prediction_set(const std::string& path, const PredictionSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write prediction file " + path);
  out << prediction_set_to_json(set).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace sdvc

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "sdvc/temporal_eval.hpp"

using namespace sdvc;

namespace {

// Straightforward repeated-scan suppression: take the global best, erase its
// neighbourhood, repeat. O(n^2), structurally unlike the library version.
std::vector<SpotPrediction> nms_reference(std::vector<SpotPrediction> spots,
                                          double window) {
  std::vector<SpotPrediction> kept;
  while (!spots.empty()) {
    size_t best = 0;
    for (size_t i = 1; i < spots.size(); ++i) {
      if (spots[i].confidence > spots[best].confidence ||
          (spots[i].confidence == spots[best].confidence &&
           spots[i].clock < spots[best].clock)) {
        best = i;
      }
    }
    SpotPrediction winner = spots[best];
    kept.push_back(winner);
    std::vector<SpotPrediction> rest;
    for (const SpotPrediction& s : spots) {
      if (clock_distance(s.clock, winner.clock) <= window) continue;
      rest.push_back(s);
    }
    spots = std::move(rest);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.clock < b.clock;
  });
  return kept;
}

// Greedy matching re-stated from the definition, used by the sweep oracle.
long matched_count(std::vector<SpotPrediction> preds,
                   const std::vector<GameClock>& gts, double tol) {
  std::stable_sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
    return a.confidence > b.confidence;
  });
  std::vector<bool> used(gts.size(), false);
  long tp = 0;
  for (const SpotPrediction& p : preds) {
    long best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      double d = clock_distance(p.clock, gts[g]);
      if (d > tol) continue;
      if (d < best_d || (d == best_d && best >= 0 && gts[g] < gts[size_t(best)])) {
        best_d = d;
        best = long(g);
      }
    }
    if (best >= 0) {
      used[size_t(best)] = true;
      ++tp;
    }
  }
  return tp;
}

// Area under the interpolated PR curve computed by an explicit confidence
// threshold sweep. Requires distinct confidences so every prefix is a
// threshold level.
double ap_sweep_oracle(const std::vector<SpotPrediction>& preds,
                       const std::vector<GameClock>& gts, double delta,
                       bool half_window) {
  if (gts.empty() && preds.empty()) return 1.0;
  if (preds.empty() || gts.empty()) return 0.0;
  double tol = half_window ? delta / 2.0 : delta;

  std::vector<double> thresholds;
  for (const SpotPrediction& p : preds) thresholds.push_back(p.confidence);
  std::sort(thresholds.rbegin(), thresholds.rend());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<std::pair<double, double>> pr;  // recall, precision
  for (double t : thresholds) {
    std::vector<SpotPrediction> subset;
    for (const SpotPrediction& p : preds)
      if (p.confidence >= t) subset.push_back(p);
    long tp = matched_count(subset, gts, tol);
    pr.push_back({double(tp) / double(gts.size()),
                  double(tp) / double(subset.size())});
  }
  double ap = 0.0, prev_recall = 0.0;
  for (size_t k = 0; k < pr.size(); ++k) {
    double interp = 0.0;
    for (size_t j = k; j < pr.size(); ++j) interp = std::max(interp, pr[j].second);
    ap += (pr[k].first - prev_recall) * interp;
    prev_recall = pr[k].first;
  }
  return ap;
}

std::vector<SpotPrediction> random_spots(std::mt19937& rng, int n,
                                         bool distinct_conf) {
  std::uniform_int_distribution<int> half(1, 2);
  std::uniform_real_distribution<double> time(0.0, 600.0);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<SpotPrediction> spots;
  std::vector<double> confs;
  if (distinct_conf) {
    for (int i = 0; i < n; ++i) confs.push_back((i + 1.0) / (n + 1.0));
    std::shuffle(confs.begin(), confs.end(), rng);
  }
  for (int i = 0; i < n; ++i) {
    SpotPrediction s;
    s.clock = {half(rng), std::floor(time(rng))};
    s.confidence = distinct_conf ? confs[size_t(i)] : conf(rng);
    spots.push_back(s);
  }
  return spots;
}

}  // namespace

// ------------------------------------------------------------------ NMS

TEST_CASE("nms keeps the stronger of two near spots") {
  std::vector<SpotPrediction> spots = {
      {{1, 100}, 0.7, ""},
      {{1, 110}, 0.9, ""},
  };
  auto out = nms(spots, 30.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].clock.seconds == 110);
  CHECK(out[0].confidence == 0.9);
}

TEST_CASE("nms confidence ties keep the earlier spot") {
  std::vector<SpotPrediction> spots = {
      {{1, 110}, 0.9, ""},
      {{1, 100}, 0.9, ""},
  };
  auto out = nms(spots, 30.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].clock.seconds == 100);
}

TEST_CASE("nms never suppresses across halves") {
  std::vector<SpotPrediction> spots = {
      {{1, 100}, 0.7, ""},
      {{2, 100}, 0.9, ""},
  };
  auto out = nms(spots, 30.0);
  CHECK(out.size() == 2);
}

TEST_CASE("nms handles empty input") {
  CHECK(nms({}, 30.0).empty());
}

TEST_CASE("nms agrees with the repeated-scan reference") {
  std::mt19937 rng(4242);
  for (int iter = 0; iter < 60; ++iter) {
    auto spots = random_spots(rng, 40, false);
    auto got = nms(spots, 30.0);
    auto want = nms_reference(spots, 30.0);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].clock == want[i].clock);
      CHECK(got[i].confidence == want[i].confidence);
    }
  }
}

TEST_CASE("nms output is sparse, sorted and idempotent") {
  std::mt19937 rng(77);
  for (int iter = 0; iter < 30; ++iter) {
    auto out = nms(random_spots(rng, 50, false), 20.0);
    for (size_t i = 1; i < out.size(); ++i) {
      CHECK(out[i - 1].clock < out[i].clock);
      if (out[i - 1].clock.half == out[i].clock.half)
        CHECK(clock_distance(out[i - 1].clock, out[i].clock) > 20.0);
    }
    auto again = nms(out, 20.0);
    REQUIRE(again.size() == out.size());
    for (size_t i = 0; i < out.size(); ++i) CHECK(again[i].clock == out[i].clock);
  }
}

// ------------------------------------------------------ average precision

TEST_CASE("average precision on exact and missed spots") {
  std::vector<GameClock> gts = {{1, 60}};
  CHECK(average_precision({{{1, 60}, 0.9, ""}}, gts, 5.0) == doctest::Approx(1.0));
  // 4s away exceeds the half-window tolerance of 2.5s.
  CHECK(average_precision({{{1, 64}, 0.9, ""}}, gts, 5.0) == doctest::Approx(0.0));
  // ... but fits the full-window variant (|dt| <= 5).
  MatchOptions full;
  full.half_window = false;
  CHECK(average_precision({{{1, 64}, 0.9, ""}}, gts, 5.0, full) ==
        doctest::Approx(1.0));
}

TEST_CASE("average precision edge conventions") {
  CHECK(average_precision({}, {}, 30.0) == doctest::Approx(1.0));
  CHECK(average_precision({}, {{1, 10}}, 30.0) == doctest::Approx(0.0));
  CHECK(average_precision({{{1, 10}, 0.5, ""}}, {}, 30.0) == doctest::Approx(0.0));
}

TEST_CASE("one ground truth cannot credit two predictions") {
  std::vector<GameClock> gts = {{1, 100}};
  std::vector<SpotPrediction> preds = {
      {{1, 99}, 0.9, ""},
      {{1, 101}, 0.8, ""},
  };
  // First pred takes the GT; the second is a false positive.
  // PR points: (1, 1), (1, 0.5) -> AP = 1.
  CHECK(average_precision(preds, gts, 10.0) == doctest::Approx(1.0));

  // Reversed confidences: the far prediction out-ranks nothing; same result
  // by symmetry of this layout.
  std::swap(preds[0].confidence, preds[1].confidence);
  CHECK(average_precision(preds, gts, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("distance ties match the earlier ground truth") {
  std::vector<GameClock> gts = {{1, 90}, {1, 110}};
  // Equidistant from both; must take t=90 so that t=110 stays free for the
  // second prediction (22s away from t=90, outside the 15s tolerance).
  std::vector<SpotPrediction> preds = {
      {{1, 100}, 0.9, ""},
      {{1, 112}, 0.8, ""},
  };
  CHECK(average_precision(preds, gts, 30.0) == doctest::Approx(1.0));
}

TEST_CASE("average precision agrees with a threshold sweep") {
  std::mt19937 rng(90210);
  std::uniform_int_distribution<int> n_pred(1, 25);
  std::uniform_int_distribution<int> n_gt(1, 12);
  std::uniform_int_distribution<int> half(1, 2);
  std::uniform_real_distribution<double> time(0.0, 400.0);
  for (int iter = 0; iter < 200; ++iter) {
    auto preds = random_spots(rng, n_pred(rng), true);
    std::vector<GameClock> gts;
    int g = n_gt(rng);
    for (int i = 0; i < g; ++i) gts.push_back({half(rng), std::floor(time(rng))});

    for (double delta : {5.0, 30.0, 60.0}) {
      double got = average_precision(preds, gts, delta);
      double want = ap_sweep_oracle(preds, gts, delta, true);
      CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("average precision is invariant to confidence scaling") {
  std::mt19937 rng(555);
  for (int iter = 0; iter < 20; ++iter) {
    auto preds = random_spots(rng, 15, true);
    std::vector<GameClock> gts;
    for (int i = 0; i < 6; ++i) gts.push_back({1, double(40 * i)});
    double base = average_precision(preds, gts, 30.0);
    auto scaled = preds;
    for (auto& p : scaled) p.confidence *= 0.5;
    CHECK(average_precision(scaled, gts, 30.0) == doctest::Approx(base));
  }
}

TEST_CASE("eleven-point interpolation differs but stays in range") {
  std::mt19937 rng(31337);
  MatchOptions eleven;
  eleven.all_point_interpolation = false;
  for (int iter = 0; iter < 50; ++iter) {
    auto preds = random_spots(rng, 12, true);
    std::vector<GameClock> gts;
    for (int i = 0; i < 5; ++i) gts.push_back({1, double(30 + 70 * i)});
    double ap = average_precision(preds, gts, 30.0, eleven);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
  }
  // Perfect predictions still score 1 under 11-point interpolation.
  std::vector<GameClock> gts = {{1, 50}, {1, 200}};
  std::vector<SpotPrediction> preds = {{{1, 50}, 0.9, ""}, {{1, 200}, 0.8, ""}};
  CHECK(average_precision(preds, gts, 30.0, eleven) == doctest::Approx(1.0));
}

// ----------------------------------------------------------------- mAP

TEST_CASE("map averages per game and per delta") {
  std::map<std::string, std::vector<GameClock>> gts;
  gts["g1"] = {{1, 100}};
  gts["g2"] = {{1, 100}};
  std::map<std::string, std::vector<SpotPrediction>> preds;
  preds["g1"] = {{{1, 100}, 0.9, ""}};  // perfect
  preds["g2"] = {{{1, 400}, 0.9, ""}};  // miss

  auto result = map_at_deltas(preds, gts, {5.0, 30.0, 60.0});
  CHECK(result.at(5.0) == doctest::Approx(0.5));
  CHECK(result.at(30.0) == doctest::Approx(0.5));
  CHECK(result.at(60.0) == doctest::Approx(0.5));
}

TEST_CASE("ground-truth games without predictions count as zero") {
  std::map<std::string, std::vector<GameClock>> gts;
  gts["g1"] = {{1, 100}};
  gts["g2"] = {{1, 100}};
  std::map<std::string, std::vector<SpotPrediction>> preds;
  preds["g1"] = {{{1, 100}, 0.9, ""}};

  auto result = map_at_deltas(preds, gts, {30.0});
  CHECK(result.at(30.0) == doctest::Approx(0.5));
}

TEST_CASE("predictions for unknown games are an error") {
  std::map<std::string, std::vector<GameClock>> gts;
  gts["g1"] = {{1, 100}};
  std::map<std::string, std::vector<SpotPrediction>> preds;
  preds["mystery"] = {{{1, 100}, 0.9, ""}};
  CHECK_THROWS_AS(map_at_deltas(preds, gts, {30.0}), std::runtime_error);
}

TEST_CASE("map is monotone in the tolerance on nested windows") {
  std::mt19937 rng(246);
  std::map<std::string, std::vector<GameClock>> gts;
  std::map<std::string, std::vector<SpotPrediction>> preds;
  for (int g = 0; g < 4; ++g) {
    std::string id = "g" + std::to_string(g);
    std::vector<GameClock> clocks;
    for (int i = 0; i < 8; ++i) clocks.push_back({1 + (i % 2), double(50 * i)});
    gts[id] = clocks;
    preds[id] = random_spots(rng, 10, true);
  }
  auto result = map_at_deltas(preds, gts, {5.0, 30.0, 60.0});
  CHECK(result.at(5.0) <= result.at(30.0) + 1e-12);
  CHECK(result.at(30.0) <= result.at(60.0) + 1e-12);
}

// ------------------------------------------------------ prediction files

TEST_CASE("prediction set round trips through json") {
  PredictionSet set;
  set.game_id = "match_007";
  set.spots = {
      {{1, 91}, 0.75, "Corner for the home side."},
      {{2, 2700}, 0.5, ""},
  };
  auto dir = std::filesystem::temp_directory_path() / "sdvc_tests";
  std::filesystem::create_directories(dir);
  auto path = (dir / "preds.json").string();
  save_prediction_set(path, set);

  PredictionSet back = load_prediction_set(path);
  CHECK(back.game_id == set.game_id);
  REQUIRE(back.spots.size() == 2);
  CHECK(back.spots[0].clock == GameClock{1, 91});
  CHECK(back.spots[0].confidence == doctest::Approx(0.75));
  CHECK(back.spots[0].comment == "Corner for the home side.");
  CHECK(back.spots[1].comment.empty());

  // Spots come back sorted even if the file shuffles them.
  ordered_json j = prediction_set_to_json(set);
  std::swap(j["predictions"][0], j["predictions"][1]);
  PredictionSet shuffled = parse_prediction_set(j.dump());
  CHECK(shuffled.spots[0].clock == GameClock{1, 91});
}

TEST_CASE("prediction parsing validates confidence and clock") {
  CHECK_THROWS(parse_prediction_set(
      R"({"game_id":"g","predictions":[{"gameTime":"1 - 00:10","confidence":1.5}]})"));
  CHECK_THROWS(parse_prediction_set(
      R"({"game_id":"g","predictions":[{"gameTime":"nonsense","confidence":0.5}]})"));
  CHECK_THROWS(parse_prediction_set(R"({"predictions":[]})"));
  CHECK_NOTHROW(parse_prediction_set(R"({"game_id":"g","predictions":[]})"));
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sdvc/document.hpp"
#include "sdvc/sdvc_eval.hpp"
#include "sdvc/text.hpp"

using namespace sdvc;

namespace {

std::string fixture(const char* name) {
  return std::string(SDVC_FIXTURE_DIR "/") + name;
}

CaptionRecord make_gt(int half, double seconds, const char* text) {
  CaptionRecord r;
  r.clock = {half, seconds};
  r.text_original = text;
  r.text_identified = text;
  r.text_anonymized = text;
  return r;
}

SpotPrediction make_pred(int half, double seconds, const char* text,
                         double conf = 1.0) {
  SpotPrediction p;
  p.clock = {half, seconds};
  p.confidence = conf;
  p.comment = text;
  return p;
}

// Exhaustive order-preserving matching, exponential but fine for <= 6 a side.
double brute_force_total(const std::vector<std::vector<double>>& s, size_t i,
                         size_t j) {
  if (i == s.size() || s.empty() || j == s[i].size()) return 0.0;
  double best = brute_force_total(s, i + 1, j);
  best = std::max(best, brute_force_total(s, i, j + 1));
  best = std::max(best, s[i][j] + brute_force_total(s, i + 1, j + 1));
  return best;
}

// Predictions that copy the ground truth exactly.
PredictionSet identity_preds(const std::vector<CaptionRecord>& gts,
                             const std::string& game_id, int text_field = 2) {
  PredictionSet set;
  set.game_id = game_id;
  for (const CaptionRecord& g : gts)
    set.spots.push_back({g.clock, 1.0, g.text(text_field)});
  return set;
}

}  // namespace

TEST_CASE("tiou basics") {
  CHECK(tiou(0, 30, 0, 30) == doctest::Approx(1.0));
  CHECK(tiou(0, 30, 30, 60) == doctest::Approx(0.0));
  CHECK(tiou(0, 30, 60, 90) == doctest::Approx(0.0));
  CHECK(tiou(0, 30, 15, 45) == doctest::Approx(1.0 / 3.0));
  CHECK(tiou(0, 30, 15, 45) == tiou(15, 45, 0, 30));  // symmetric
}

TEST_CASE("order-preserving matching against brute force") {
  std::mt19937 rng(60601);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::uniform_real_distribution<double> zero_prob(0.0, 1.0);
  for (int iter = 0; iter < 100; ++iter) {
    size_t n = size_t(dim(rng)), m = size_t(dim(rng));
    std::vector<std::vector<double>> s(n, std::vector<double>(m, 0.0));
    for (auto& row : s)
      for (double& v : row) v = zero_prob(rng) < 0.3 ? 0.0 : val(rng);
    CHECK(max_order_preserving_total(s) ==
          doctest::Approx(brute_force_total(s, 0, 0)).epsilon(1e-12));
  }
  CHECK(max_order_preserving_total({}) == 0.0);
}

TEST_CASE("order-preserving matching refuses to cross pairs") {
  // Crossing (0,1)+(1,0) would give 1.8; the order constraint allows one of
  // them alone (0.9) or the diagonal (0.2).
  std::vector<std::vector<double>> s = {{0.1, 0.9}, {0.9, 0.1}};
  CHECK(max_order_preserving_total(s) == doctest::Approx(0.9));
}

TEST_CASE("windowed metric hand enumeration") {
  std::vector<CaptionRecord> gts = {
      make_gt(1, 100, "the quick brown fox jumps"),
      make_gt(1, 120, "a slow green turtle crawls"),
      make_gt(1, 400, "corner for the home side"),
      make_gt(2, 200, "free kick in a dangerous area"),
  };
  PredictionSet preds;
  preds.game_id = "g";
  preds.spots = {
      make_pred(1, 110, "the quick brown fox jumps", 0.9),
      make_pred(1, 405, "a clear penalty shout", 0.8),
  };
  SdvcConfig cfg;
  cfg.delta_seconds = 30.0;  // tolerance 15s around each side

  // Prediction 1 sees both early GT captions (10s away each) and matches the
  // first one exactly; prediction 2 sees only the corner caption and shares
  // no token with it. Half 1 mean = (1 + 0) / 2; half 2 has GT but no
  // predictions, so it scores 0. Game = (0.5 + 0) / 2.
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) ==
        doctest::Approx(0.25));
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::Bleu4) ==
        doctest::Approx(0.25).epsilon(1e-6));  // pair 2 contributes ~1e-9

  // METEOR identity carries the minimal chunk penalty for 5 tokens.
  double meteor_identity = 1.0 - 0.5 / 125.0;
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::Meteor) ==
        doctest::Approx((meteor_identity / 2.0) / 2.0));

  // A prediction whose window holds no ground truth scores exactly zero.
  preds.spots.push_back(make_pred(1, 300, "the quick brown fox jumps", 0.7));
  std::sort(preds.spots.begin(), preds.spots.end(),
            [](const SpotPrediction& a, const SpotPrediction& b) {
              return a.clock.seconds < b.clock.seconds;
            });
  double three = windowed_metric(preds, gts, cfg, CaptionMetric::RougeL);
  CHECK(three == doctest::Approx(((1.0 + 0.0 + 0.0) / 3.0 + 0.0) / 2.0));
}

TEST_CASE("windowed tolerance is half the delta") {
  std::vector<CaptionRecord> gts = {make_gt(1, 100, "corner for the home side"),
                                    make_gt(2, 100, "a long spell of pressure")};
  PredictionSet preds;
  preds.game_id = "g";
  preds.spots = {make_pred(1, 116, "corner for the home side")};

  SdvcConfig cfg;
  cfg.delta_seconds = 30.0;  // 16s > 15s: out of window
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) ==
        doctest::Approx(0.0));
  cfg.delta_seconds = 60.0;  // 16s <= 30s: inside
  // Half 1 scores 1, half 2 has GT but no predictions and scores 0.
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) ==
        doctest::Approx(0.5));
}

TEST_CASE("windows never cross the half-time break") {
  std::vector<CaptionRecord> gts = {make_gt(1, 2690, "corner for the home side"),
                                    make_gt(2, 5, "a long spell of pressure")};
  PredictionSet preds;
  preds.game_id = "g";
  // Same text as the half-1 GT but anchored in half 2: reference set holds
  // only the half-2 caption.
  preds.spots = {make_pred(2, 8, "corner for the home side")};
  SdvcConfig cfg;
  cfg.delta_seconds = 60.0;
  // Half 1: GT, no preds -> 0. Half 2: rouge(corner..., pressure...) ~ low.
  double got = windowed_metric(preds, gts, cfg, CaptionMetric::RougeL);
  ScoredPair cross{tokenize("corner for the home side"),
                   {tokenize("a long spell of pressure")}};
  CHECK(got == doctest::Approx((0.0 + rouge_l_pair(cross)) / 2.0));
}

TEST_CASE("gt-averaged variant rewards covered ground truth") {
  std::vector<CaptionRecord> gts = {make_gt(1, 100, "corner for the home side")};
  PredictionSet preds;
  preds.game_id = "g";
  preds.spots = {make_pred(1, 100, "corner for the home side", 0.9),
                 make_pred(1, 105, "nothing here at all", 0.8)};

  SdvcConfig cfg;
  cfg.delta_seconds = 30.0;
  // Prediction-averaged: (1 + 0) / 2 in half 1, empty half 2 counts 1.
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) ==
        doctest::Approx((0.5 + 1.0) / 2.0));
  // GT-averaged: the one GT caption takes its best prediction.
  cfg.gt_averaged = true;
  CHECK(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL) ==
        doctest::Approx(1.0));
}

TEST_CASE("windowed metrics require caption text on predictions") {
  std::vector<CaptionRecord> gts = {make_gt(1, 100, "corner for the home side")};
  PredictionSet preds;
  preds.game_id = "g";
  preds.spots = {{{1, 100}, 0.9, ""}};
  SdvcConfig cfg;
  CHECK_THROWS_AS(windowed_metric(preds, gts, cfg, CaptionMetric::RougeL),
                  std::runtime_error);
  CHECK_THROWS_AS(soda_c_windowed(preds, gts, cfg), std::runtime_error);
}

TEST_CASE("soda on identical predictions reduces to mean meteor") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  PredictionSet preds = identity_preds(doc.captions, doc.game_id);
  SdvcConfig cfg;

  // Expected per half: diagonal matching with tIoU 1, so F equals the mean
  // identity METEOR of that half's captions.
  double expect = 0.0;
  for (int half = 1; half <= 2; ++half) {
    double sum = 0.0;
    long n = 0;
    for (const CaptionRecord& r : doc.captions) {
      if (r.clock.half != half) continue;
      TokenList toks = tokenize(r.text_anonymized);
      sum += meteor_pair({toks, {toks}});
      ++n;
    }
    expect += n == 0 ? 1.0 : sum / double(n);
  }
  expect /= 2.0;
  CHECK(soda_c_windowed(preds, doc.captions, cfg) ==
        doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("soda empty-side conventions") {
  SdvcConfig cfg;
  PredictionSet none;
  none.game_id = "g";
  std::vector<CaptionRecord> gts = {make_gt(1, 100, "corner for the home side")};
  // Half 1: GT but no preds -> 0. Half 2: both empty -> 1.
  CHECK(soda_c_windowed(none, gts, cfg) == doctest::Approx(0.5));
  CHECK(soda_c_windowed(none, {}, cfg) == doctest::Approx(1.0));

  PredictionSet some;
  some.game_id = "g";
  some.spots = {make_pred(1, 100, "corner for the home side")};
  // Preds but no GT at all: both halves... half 1 scores 0, half 2 is 1.
  CHECK(soda_c_windowed(some, {}, cfg) == doctest::Approx(0.5));
}

TEST_CASE("soda matching agrees with brute force") {
  std::mt19937 rng(171717);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<int> step(5, 40);
  std::uniform_int_distribution<int> word(0, 5);
  std::uniform_int_distribution<int> len(1, 6);
  const char* vocab[] = {"corner", "goal", "save", "pressure", "foul", "cross"};

  for (int iter = 0; iter < 60; ++iter) {
    std::vector<CaptionRecord> gts;
    PredictionSet preds;
    preds.game_id = "g";
    double t = 0;
    int n_gt = count(rng), n_pred = count(rng);
    auto sentence = [&] {
      std::string s;
      int n = len(rng);
      for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += vocab[word(rng)];
      }
      return s;
    };
    for (int i = 0; i < n_gt; ++i) {
      t += step(rng);
      gts.push_back(make_gt(1, t, sentence().c_str()));
    }
    t = 0;
    for (int i = 0; i < n_pred; ++i) {
      t += step(rng);
      preds.spots.push_back(make_pred(1, t, sentence().c_str()));
    }

    SdvcConfig cfg;
    double got = soda_c_windowed(preds, gts, cfg);

    // Rebuild the score matrix from the declared formula.
    std::vector<std::vector<double>> s(gts.size(),
                                       std::vector<double>(preds.spots.size()));
    for (size_t i = 0; i < gts.size(); ++i)
      for (size_t j = 0; j < preds.spots.size(); ++j) {
        double ov = tiou(gts[i].clock.seconds - 15, gts[i].clock.seconds + 15,
                         preds.spots[j].clock.seconds - 15,
                         preds.spots[j].clock.seconds + 15);
        ScoredPair pair{tokenize(preds.spots[j].comment),
                        {tokenize(gts[i].text_anonymized)}};
        s[i][j] = ov <= 0.0 ? 0.0 : ov * meteor_pair(pair);
      }
    double total = brute_force_total(s, 0, 0);
    double precision = total / double(preds.spots.size());
    double recall = total / double(gts.size());
    double f = precision + recall <= 0
                   ? 0.0
                   : 2 * precision * recall / (precision + recall);
    CHECK(got == doctest::Approx((f + 1.0) / 2.0).epsilon(1e-9));
  }
}

TEST_CASE("evaluation is invariant under time translation") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  PredictionSet preds = identity_preds(doc.captions, doc.game_id);
  // Perturb the copies so the match is imperfect but stable.
  for (size_t i = 0; i < preds.spots.size(); ++i)
    preds.spots[i].clock.seconds += (i % 2 == 0 ? 4.0 : -3.0);

  SdvcConfig cfg;
  double base_w = windowed_metric(preds, doc.captions, cfg, CaptionMetric::RougeL);
  double base_s = soda_c_windowed(preds, doc.captions, cfg);

  auto shifted_doc = doc;
  auto shifted_preds = preds;
  for (CaptionRecord& r : shifted_doc.captions) r.clock.seconds += 7.0;
  for (SpotPrediction& p : shifted_preds.spots) p.clock.seconds += 7.0;

  CHECK(windowed_metric(shifted_preds, shifted_doc.captions, cfg,
                        CaptionMetric::RougeL) == doctest::Approx(base_w));
  CHECK(soda_c_windowed(shifted_preds, shifted_doc.captions, cfg) ==
        doctest::Approx(base_s));
}

TEST_CASE("full evaluation with identity predictions") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  std::map<std::string, std::vector<CaptionRecord>> gts;
  gts[doc.game_id] = doc.captions;
  std::map<std::string, PredictionSet> preds;
  preds[doc.game_id] = identity_preds(doc.captions, doc.game_id);

  SdvcConfig cfg;
  SdvcReport report =
      evaluate_sdvc(preds, gts, cfg, {5.0, 30.0, 60.0}, {30.0, 60.0});

  for (double tol : {5.0, 30.0, 60.0})
    CHECK(report.map_at.at(tol) == doctest::Approx(1.0));
  for (double delta : {30.0, 60.0}) {
    CHECK(report.windowed.at(delta).at("bleu4") == doctest::Approx(1.0));
    CHECK(report.windowed.at(delta).at("rouge_l") == doctest::Approx(1.0));
    CHECK(report.windowed.at(delta).at("meteor") > 0.95);
    CHECK(report.windowed.at(delta).at("cider") > 0.0);
  }
  CHECK(report.soda_c > 0.95);
  CHECK(report.per_game.contains(doc.game_id));

  ordered_json j = report.to_json();
  CHECK(j.contains("config"));
  CHECK(j["spotting"]["map_at"].contains("30"));
  CHECK(j["captioning"]["windowed"].contains("60"));
  CHECK(j["per_game"][doc.game_id].contains("soda_c"));
}

TEST_CASE("full evaluation with an empty prediction corpus") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  std::map<std::string, std::vector<CaptionRecord>> gts;
  gts[doc.game_id] = doc.captions;  // captions in both halves

  SdvcReport report = evaluate_sdvc({}, gts, SdvcConfig{}, {30.0}, {30.0});
  CHECK(report.map_at.at(30.0) == doctest::Approx(0.0));
  CHECK(report.windowed.at(30.0).at("bleu4") == doctest::Approx(0.0));
  CHECK(report.windowed.at(30.0).at("rouge_l") == doctest::Approx(0.0));
  CHECK(report.windowed.at(30.0).at("cider") == doctest::Approx(0.0));
  CHECK(report.soda_c == doctest::Approx(0.0));
}

TEST_CASE("full evaluation rejects unknown games") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  std::map<std::string, std::vector<CaptionRecord>> gts;
  gts[doc.game_id] = doc.captions;
  std::map<std::string, PredictionSet> preds;
  preds["mystery"] = identity_preds(doc.captions, "mystery");
  CHECK_THROWS_AS(evaluate_sdvc(preds, gts, SdvcConfig{}, {30.0}, {30.0}),
                  std::runtime_error);
}

TEST_CASE("full evaluation is deterministic") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  std::map<std::string, std::vector<CaptionRecord>> gts;
  gts[doc.game_id] = doc.captions;
  std::map<std::string, PredictionSet> preds;
  preds[doc.game_id] = identity_preds(doc.captions, doc.game_id);
  // Nudge a few clocks so scores are non-trivial.
  preds[doc.game_id].spots[0].clock.seconds += 5;
  preds[doc.game_id].spots[2].clock.seconds += 9;

  SdvcConfig cfg;
  auto a = evaluate_sdvc(preds, gts, cfg, {5.0, 30.0}, {30.0, 60.0});
  auto b = evaluate_sdvc(preds, gts, cfg, {5.0, 30.0}, {30.0, 60.0});
  CHECK(a.to_json().dump(2) == b.to_json().dump(2));
}

TEST_CASE("caption metric names") {
  CHECK(caption_metric_name(CaptionMetric::Bleu4) == "bleu4");
  CHECK(caption_metric_name(CaptionMetric::Meteor) == "meteor");
  CHECK(caption_metric_name(CaptionMetric::RougeL) == "rouge_l");
  CHECK(caption_metric_name(CaptionMetric::Cider) == "cider");
}

#pragma once
// Synthetic corpora shared by the model unit tests, the CLI tests, and the
// acceptance suite. Everything is deterministic given the seed.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sdvc/clock.hpp"
#include "sdvc/model.hpp"
#include "sdvc/train.hpp"
#include "sdvc/vocabulary.hpp"

namespace toy {

// Spotting corpus: two feature channels at 1 fps. Channel 0 is a constant
// carrier; channel 1 carries a triangular hump of half-width 12 s around each
// anchor. The hump is wider than the 15 s training chunk on purpose: a
// permutation-invariant pooling of a sliding window then peaks exactly when
// the window is centered on the anchor, so confidence ranking localizes the
// anchor to within half a frame.
inline constexpr double kHumpHalfWidth = 12.0;

inline sdvc::HalfFeatures toy_half(const std::vector<double>& anchors,
                                   int seconds, std::mt19937& rng) {
  std::uniform_real_distribution<double> jitter(-0.005, 0.005);
  sdvc::HalfFeatures half;
  half.fps = 1.0;
  half.frames = sdvc::Mat(seconds, 2);
  for (int t = 0; t < seconds; ++t) {
    double hump = 0.0;
    for (double a : anchors)
      hump += std::max(0.0, 1.0 - std::abs(t - a) / kHumpHalfWidth);
    half.frames(t, 0) = 1.0 + jitter(rng);
    half.frames(t, 1) = hump + jitter(rng);
  }
  return half;
}

inline sdvc::SpottingGame toy_game(int seconds, std::mt19937& rng) {
  std::uniform_int_distribution<int> offset(-8, 8);
  sdvc::SpottingGame game;
  for (int h = 0; h < 2; ++h) {
    std::vector<double> anchors;
    for (int base = 45; base + 35 < seconds; base += 85)
      anchors.push_back(double(base + offset(rng)));
    game.anchors[h] = anchors;
    game.halves[h] = toy_half(anchors, seconds, rng);
  }
  return game;
}

struct ToySpotting {
  std::vector<sdvc::SpottingGame> train;
  std::vector<sdvc::SpottingGame> valid;
  std::vector<sdvc::SpottingGame> test;
  std::vector<std::string> test_ids;
  std::map<std::string, std::vector<sdvc::GameClock>> test_gt;
};

inline ToySpotting make_toy_spotting(unsigned seed = 7, int train_games = 3,
                                     int test_games = 2,
                                     int half_seconds = 420) {
  std::mt19937 rng(seed);
  ToySpotting toy;
  for (int g = 0; g < train_games; ++g)
    toy.train.push_back(toy_game(half_seconds, rng));
  toy.valid.push_back(toy_game(half_seconds, rng));
  for (int g = 0; g < test_games; ++g) {
    toy.test.push_back(toy_game(half_seconds, rng));
    std::string id = "toy_test_" + std::to_string(g);
    toy.test_ids.push_back(id);
    std::vector<sdvc::GameClock> gt;
    for (int h = 0; h < 2; ++h)
      for (double a : toy.test.back().anchors[h])
        gt.push_back({h + 1, a});
    toy.test_gt[id] = gt;
  }
  return toy;
}

// Caption corpus: `count` clips of identical rows pointing in a random unit
// direction, each paired with a distinct token sequence over a small
// vocabulary. Ids 0..7 are reserved for the specials, content ids follow.
struct ToyCaptions {
  std::vector<sdvc::CaptionExample> examples;
  int vocab_size = 0;
};

inline ToyCaptions make_toy_captions(unsigned seed = 11, int count = 20,
                                     int dim = 8, int frames = 12,
                                     int content_words = 16) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> len(3, 7);
  std::uniform_int_distribution<int> word(8, 8 + content_words - 1);
  ToyCaptions toy;
  toy.vocab_size = 8 + content_words;
  std::vector<std::vector<int>> seen;
  for (int i = 0; i < count; ++i) {
    sdvc::Vec direction(dim);
    for (int d = 0; d < dim; ++d) direction(d) = gauss(rng);
    direction.normalize();
    sdvc::CaptionExample ex;
    ex.clip = direction.transpose().replicate(frames, 1);
    do {
      ex.tokens.assign(1, sdvc::Vocabulary::kBos);
      int n = len(rng);
      for (int w = 0; w < n; ++w) ex.tokens.push_back(word(rng));
      ex.tokens.push_back(sdvc::Vocabulary::kEos);
    } while (std::find(seen.begin(), seen.end(), ex.tokens) != seen.end());
    seen.push_back(ex.tokens);
    toy.examples.push_back(std::move(ex));
  }
  return toy;
}

// Caption examples carved out of a spotting corpus (one clip per anchor) so
// that a captioning model shares the spotting aggregator's geometry; used by
// the transfer-learning tests.
inline std::vector<sdvc::CaptionExample> caption_examples_from(
    const std::vector<sdvc::SpottingGame>& games, int vocab_size,
    double window_seconds = 45.0) {
  std::vector<sdvc::CaptionExample> out;
  int i = 0;
  for (const auto& game : games)
    for (int h = 0; h < 2; ++h)
      for (double a : game.anchors[h]) {
        sdvc::CaptionExample ex;
        ex.clip = sdvc::trim_clip(game.halves[h], a, window_seconds);
        int span = vocab_size - 8;
        ex.tokens = {sdvc::Vocabulary::kBos, 8 + i % span,
                     8 + (i * 3 + 1) % span, 8 + (i * 5 + 2) % span,
                     sdvc::Vocabulary::kEos};
        out.push_back(std::move(ex));
        ++i;
      }
  return out;
}

}  // namespace toy

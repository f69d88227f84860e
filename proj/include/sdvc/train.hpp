#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sdvc/document.hpp"
#include "sdvc/model.hpp"

namespace sdvc {

struct TrainConfig {
  double lr_init = 1e-3;
  double lr_factor = 10.0;    // divide lr by this on plateau
  int plateau_patience = 10;  // epochs without improvement before reduction
  double lr_stop = 1e-6;      // stop once lr falls below this
  double chunk_seconds = 15.0;
  double caption_window_seconds = 45.0;
  double nms_seconds = 30.0;
  double teacher_forcing_ratio = 1.0;
  uint64_t seed = 0;
  int max_epochs = 500;  // safety cap on top of the lr schedule
  ordered_json to_json() const;
};

struct TrainLogRow {
  int epoch;
  std::string split;  // "train" or "valid"
  double loss;
  double lr;
};
struct TrainLog {
  std::vector<TrainLogRow> rows;
  std::string to_csv() const;  // header epoch,split,loss,lr
};

// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
  std::vector<Mat> m, v;
  long step = 0;
};
AdamState adam_init(const TensorList& params);
void adam_step(const TensorList& params, const TensorList& grads,
               AdamState* state, double lr);

enum class TransferMode { Scratch, Frozen, FineTuned };
std::string transfer_mode_name(TransferMode mode);

// Aggregator hand-off between the two stages. Scratch ignores the source;
// Frozen/FineTuned copy it (kind and shapes must match the request) and
// Frozen additionally excludes the aggregator from gradient updates.
struct TransferSpec {
  const AggregatorParams* source = nullptr;
  TransferMode mode = TransferMode::Scratch;
};

// ------------------------------------------------------------------ spotting

// One game's training material: per half, frame features plus GT anchor
// times in seconds.
struct SpottingGame {
  std::array<HalfFeatures, 2> halves;
  std::array<std::vector<double>, 2> anchors;
};

struct SpottingTrainResult {
  SpottingModel model;
  TrainLog log;
};

// Per epoch, every GT anchor contributes one random chunk of chunk_seconds
// containing it, plus an equal number of anchor-free background chunks from
// the same half; a chunk is foreground iff an anchor lies strictly inside.
// BCE optimized per chunk; lr schedule per TrainConfig; validation loss (or
// the train loss when `valid` is empty) drives the plateau detector.
// Non-finite loss raises an error naming the epoch.
SpottingTrainResult spotting_train(const std::vector<SpottingGame>& train,
                                   const std::vector<SpottingGame>& valid,
                                   AggregatorKind kind, int clusters,
                                   const TrainConfig& cfg,
                                   const TransferSpec& transfer = {});

// ---------------------------------------------------------------- captioning

// A trimmed clip with its gold token sequence (BOS ... EOS).
struct CaptionExample {
  Mat clip;
  std::vector<int> tokens;
};

struct CaptionTrainResult {
  CaptioningModel model;
  TrainLog log;
  int forced_steps = 0;  // teacher-forcing draw tallies across training
  int free_steps = 0;
};

CaptionTrainResult caption_train(const std::vector<CaptionExample>& train,
                                 const std::vector<CaptionExample>& valid,
                                 AggregatorKind kind, int clusters, int vocab,
                                 const ModelDims& dims, const TrainConfig& cfg,
                                 const TransferSpec& transfer = {});

}  // namespace sdvc

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdvc/temporal_eval.hpp"
#include "sdvc/vocabulary.hpp"

namespace sdvc {

// All trainable tensors are double-precision column-major matrices; vectors
// are stored N x 1 so optimizers, checkpoints, and gradient checks can walk
// one uniform list (see tensors() below).
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class AggregatorKind { NetVLAD, NetRVLAD, NetVLADpp, NetRVLADpp };

std::string aggregator_kind_name(AggregatorKind kind);
AggregatorKind aggregator_kind_from_name(const std::string& name);
bool is_split_kind(AggregatorKind kind);  // the ++ variants

// One soft-assignment pooling bank: assign_w (K x D), assign_b (K x 1), and
// for the VLAD kinds the cluster centers (K x D; 0 x 0 otherwise).
struct AggregatorCore {
  Mat assign_w;
  Mat assign_b;
  Mat centers;
};

// ++ kinds hold two independent cores of clusters/2 each (before/after the
// clip midpoint); the plain kinds hold one core of `clusters`.
struct AggregatorParams {
  AggregatorKind kind = AggregatorKind::NetRVLAD;
  int clusters = 0;  // total across cores
  int dim = 0;       // input feature dimension D
  std::vector<AggregatorCore> cores;
  int output_dim() const { return clusters * dim; }
};

// Fresh seeded parameters. When `sample_frames` is given, centers (and the
// assignment rows) start from rows sampled without replacement; otherwise
// scaled-uniform fan-in init. `clusters` must be even for ++ kinds.
AggregatorParams init_aggregator(AggregatorKind kind, int clusters, int dim,
                                 std::mt19937& rng,
                                 const Mat* sample_frames = nullptr);

// Forward intermediates kept for the backward pass.
struct AggregatorCoreCache {
  Mat frames;      // T x D rows seen by this core
  Mat assign;      // T x K softmax assignments
  Mat pooled;      // K x D pre-normalization V
  Vec intra_norm;  // K per-cluster norms
  Mat unit;        // K x D after per-cluster normalization
};
struct AggregatorCache {
  std::vector<AggregatorCoreCache> cores;
  Vec flat;            // concatenated pre-global-norm vector
  double global_norm = 0.0;
};

// Pools T time-ordered frame rows into one unit-norm vector of length K*D:
// a_k(x_t) = softmax_k(W x_t + b), V_k = sum_t a_k(x_t) (x_t - C_k) (VLAD)
// or sum_t a_k(x_t) x_t (RVLAD); per-cluster L2 normalization, then global
// unit norm of the flattened vector. ++ kinds pool [0, ceil(T/2)) and the
// rest separately and concatenate. T >= 1 (>= 2 for ++ kinds).
Vec aggregate_forward(const Mat& frames, const AggregatorParams& p,
                      AggregatorCache* cache);
inline Vec aggregate(const Mat& frames, const AggregatorParams& p) {
  return aggregate_forward(frames, p, nullptr);
}

// Accumulates parameter gradients into `grads` (same shapes as `p`) and
// returns dLoss/dframes.
Mat aggregate_backward(const Vec& dout, const AggregatorParams& p,
                       const AggregatorCache& cache, AggregatorParams* grads);

// ------------------------------------------------------------------ spotting

struct SpottingHeadParams {
  Mat w;  // 2 x (K*D)
  Mat b;  // 2 x 1
};

struct SpottingModel {
  AggregatorParams agg;
  SpottingHeadParams head;
};

SpottingModel init_spotting_model(AggregatorKind kind, int clusters, int dim,
                                  std::mt19937& rng,
                                  const Mat* sample_frames = nullptr);

// (foreground, background) sigmoid probabilities for one clip.
Eigen::Vector2d spotting_forward(const Mat& clip, const SpottingModel& m);

// Mean binary cross-entropy over the two complementary outputs
// (foreground target, 1 - foreground target). Accumulates into `grads`
// when non-null.
double spotting_loss(const Mat& clip, bool foreground, const SpottingModel& m,
                     SpottingModel* grads);

// ---------------------------------------------------------------- captioning

struct LstmLayerParams {
  Mat wx;  // 4H x input (gate order: input, forget, cell, output)
  Mat wh;  // 4H x H
  Mat b;   // 4H x 1
};

struct CaptioningHeadParams {
  Mat fc1_w, fc1_b;  // (K*D) -> H
  Mat fc2_w, fc2_b;  // H -> H
  double dropout_rate = 0.4;
  Mat embedding;  // V x E
  std::vector<LstmLayerParams> lstm;  // layer 0 consumes E, deeper layers H
  Mat proj_w, proj_b;  // H -> V
  int hidden() const { return int(fc1_w.rows()); }
  int embed_dim() const { return int(embedding.cols()); }
  int vocab() const { return int(embedding.rows()); }
};

struct CaptioningModel {
  AggregatorParams agg;
  CaptioningHeadParams head;
};

struct ModelDims {
  int hidden = 512;
  int embed = 256;
  int layers = 1;
  double dropout = 0.4;
};

CaptioningModel init_captioning_model(AggregatorKind kind, int clusters,
                                      int dim, int vocab, const ModelDims& dims,
                                      std::mt19937& rng,
                                      const Mat* sample_frames = nullptr);

// Teacher-forced pass over `tokens` (BOS ... EOS, length >= 2). The clip
// vector runs through FC1 -> ReLU -> dropout -> FC2 -> ReLU -> dropout and
// initializes layer 1's hidden state (other layers and all cell states start
// at zero). Step s consumes the gold token s with probability
// `teacher_forcing` (drawn from `rng`), else the previous step's argmax.
// Dropout masks come from `rng` when `train`, unless fixed masks are supplied
// (the gradient-check hook). Returns mean cross-entropy over the
// tokens.size()-1 predicted positions; accumulates gradients when `grads`
// is non-null; appends each step's softmax row to `step_probs` when asked.
struct CaptionPassOptions {
  bool train = false;
  double teacher_forcing = 1.0;
  std::mt19937* rng = nullptr;
  const Vec* fixed_mask1 = nullptr;
  const Vec* fixed_mask2 = nullptr;
  std::vector<Vec>* step_probs = nullptr;
  int* forced_steps = nullptr;  // counts steps fed the gold token
  int* free_steps = nullptr;    // counts steps fed the model argmax
};
double caption_pass(const Mat& clip, const std::vector<int>& tokens,
                    const CaptioningModel& m, const CaptionPassOptions& opts,
                    CaptioningModel* grads);

// Greedy decode from BOS: at most `max_len` generated tokens, stopping at
// EOS (excluded from the result). Deterministic; dropout off.
std::vector<int> caption_greedy(const Mat& clip, const CaptioningModel& m,
                                int max_len = 60);

// --------------------------------------------------------------- uniform API

using TensorList = std::vector<std::pair<std::string, Mat*>>;

TensorList tensors(AggregatorParams& p, const std::string& prefix = "agg.");
TensorList tensors(SpottingModel& m);
TensorList tensors(CaptioningModel& m);

// Zero-valued copies with identical shapes (gradient accumulators).
AggregatorParams zeros_like(const AggregatorParams& p);
SpottingModel zeros_like(const SpottingModel& m);
CaptioningModel zeros_like(const CaptioningModel& m);

// ----------------------------------------------------------------- inference

// A half's frame features at a fixed rate; row t covers time t / fps.
struct HalfFeatures {
  Mat frames;
  double fps = 1.0;
};

// Sliding window of chunk_seconds (stride one frame), foreground probability
// read at the window center; windows whose foreground probability does not
// beat the background output are dropped, then NMS over nms_seconds. A half
// shorter than one chunk yields nothing.
std::vector<SpotPrediction> spotting_infer(const HalfFeatures& half,
                                           int half_index,
                                           const SpottingModel& m,
                                           double chunk_seconds,
                                           double nms_seconds);

// Rows of `half` covering [t - window/2, t + window/2], clamped to the half.
Mat trim_clip(const HalfFeatures& half, double t, double window_seconds);

// Full two-stage pipeline over one game: spot, trim to the caption window,
// decode greedily.
PredictionSet sdvc_infer(const std::string& game_id,
                         const std::vector<HalfFeatures>& halves,
                         const SpottingModel& spot,
                         const CaptioningModel& capt, const Vocabulary& vocab,
                         double chunk_seconds, double nms_seconds,
                         double caption_window_seconds);

}  // namespace sdvc

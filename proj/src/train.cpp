#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sdvc/train.hpp"

namespace sdvc {

ordered_json TrainConfig::to_json() const {
  ordered_json o;
  o["lr_init"] = lr_init;
  o["lr_factor"] = lr_factor;
  o["plateau_patience"] = plateau_patience;
  o["lr_stop"] = lr_stop;
  o["chunk_seconds"] = chunk_seconds;
  o["caption_window_seconds"] = caption_window_seconds;
  o["nms_seconds"] = nms_seconds;
  o["teacher_forcing_ratio"] = teacher_forcing_ratio;
  o["seed"] = seed;
  o["max_epochs"] = max_epochs;
  return o;
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,split,loss,lr\n";
  char buf[128];
  for (const TrainLogRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.10g,%.10g\n", r.epoch,
                  r.split.c_str(), r.loss, r.lr);
    out += buf;
  }
  return out;
}

AdamState adam_init(const TensorList& params) {
  AdamState s;
  for (const auto& [name, mat] : params) {
    s.m.push_back(Mat::Zero(mat->rows(), mat->cols()));
    s.v.push_back(Mat::Zero(mat->rows(), mat->cols()));
  }
  return s;
}

void adam_step(const TensorList& params, const TensorList& grads,
               AdamState* state, double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (params.size() != grads.size() || params.size() != state->m.size())
    throw std::invalid_argument("optimizer tensor lists disagree");
  ++state->step;
  double bc1 = 1.0 - std::pow(kBeta1, double(state->step));
  double bc2 = 1.0 - std::pow(kBeta2, double(state->step));
  for (size_t i = 0; i < params.size(); ++i) {
    const Mat& g = *grads[i].second;
    Mat& m = state->m[i];
    Mat& v = state->v[i];
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    params[i].second->array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
  }
}

std::string transfer_mode_name(TransferMode mode) {
  switch (mode) {
    case TransferMode::Scratch: return "scratch";
    case TransferMode::Frozen: return "frozen";
    case TransferMode::FineTuned: return "fine-tuned";
  }
  throw std::logic_error("bad transfer mode");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void apply_transfer(AggregatorParams* agg, const TransferSpec& transfer) {
  if (transfer.mode == TransferMode::Scratch || transfer.source == nullptr)
    return;
  const AggregatorParams& src = *transfer.source;
  if (src.kind != agg->kind || src.clusters != agg->clusters ||
      src.dim != agg->dim)
    throw std::runtime_error(
        "transfer mismatch: source aggregator is " +
        aggregator_kind_name(src.kind) + " K=" + std::to_string(src.clusters) +
        " D=" + std::to_string(src.dim) + ", target wants " +
        aggregator_kind_name(agg->kind) + " K=" + std::to_string(agg->clusters) +
        " D=" + std::to_string(agg->dim));
  *agg = src;
}

bool agg_frozen(const TransferSpec& transfer) {
  return transfer.mode == TransferMode::Frozen && transfer.source != nullptr;
}

TensorList drop_aggregator(const TensorList& all) {
  TensorList kept;
  for (const auto& entry : all)
    if (entry.first.rfind("agg.", 0) != 0) kept.push_back(entry);
  return kept;
}

// lr schedule shared by both trainers: strict improvement of the monitored
// loss resets the plateau counter; `patience` flat epochs divide lr by
// lr_factor; training stops when lr falls below lr_stop or at max_epochs.
template <typename EpochFn, typename ValidFn>
TrainLog run_schedule(const TrainConfig& cfg, bool has_valid, EpochFn run_epoch,
                      ValidFn run_valid) {
  TrainLog log;
  double lr = cfg.lr_init;
  double best = kInf;
  int flat = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double train_loss = run_epoch(lr);
    if (!std::isfinite(train_loss))
      throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    log.rows.push_back({epoch, "train", train_loss, lr});
    double monitored = train_loss;
    if (has_valid) {
      double val_loss = run_valid();
      if (!std::isfinite(val_loss))
        throw std::runtime_error(
            "training diverged (non-finite validation loss) at epoch " +
            std::to_string(epoch));
      log.rows.push_back({epoch, "valid", val_loss, lr});
      monitored = val_loss;
    }
    if (monitored < best) {
      best = monitored;
      flat = 0;
    } else {
      ++flat;
    }
    if (flat >= cfg.plateau_patience) {
      lr /= cfg.lr_factor;
      flat = 0;
    }
    if (lr < cfg.lr_stop) break;
  }
  return log;
}

// ------------------------------------------------------------------ spotting

struct Chunk {
  Mat clip;
  bool fg;
};

Eigen::Index chunk_frames(const HalfFeatures& half, double chunk_seconds) {
  return std::max<Eigen::Index>(
      1, Eigen::Index(std::llround(chunk_seconds * half.fps)));
}

bool contains_anchor(const std::vector<double>& anchors, double t0, double t1) {
  for (double a : anchors)
    if (t0 < a && a < t1) return true;
  return false;
}

// One chunk per anchor (random position containing it) plus an equal number
// of anchor-free chunks from the same half.
std::vector<Chunk> sample_chunks(const std::vector<SpottingGame>& games,
                                 double chunk_seconds, std::mt19937& rng) {
  std::vector<Chunk> chunks;
  for (const SpottingGame& game : games) {
    for (int h = 0; h < 2; ++h) {
      const HalfFeatures& half = game.halves[h];
      Eigen::Index w = chunk_frames(half, chunk_seconds);
      Eigen::Index T = half.frames.rows();
      if (T < w) continue;
      int fg_here = 0;
      for (double a : game.anchors[h]) {
        double fa = a * half.fps;
        Eigen::Index lo = Eigen::Index(std::floor(fa - double(w))) + 1;
        Eigen::Index hi = Eigen::Index(std::ceil(fa)) - 1;
        lo = std::max<Eigen::Index>(lo, 0);
        hi = std::min<Eigen::Index>(hi, T - w);
        if (lo > hi) continue;
        std::uniform_int_distribution<Eigen::Index> pick(lo, hi);
        chunks.push_back({half.frames.middleRows(pick(rng), w), true});
        ++fg_here;
      }
      std::uniform_int_distribution<Eigen::Index> anywhere(0, T - w);
      for (int n = 0; n < fg_here; ++n) {
        for (int attempt = 0; attempt < 100; ++attempt) {
          Eigen::Index s = anywhere(rng);
          if (contains_anchor(game.anchors[h], double(s) / half.fps,
                              double(s + w) / half.fps))
            continue;
          chunks.push_back({half.frames.middleRows(s, w), false});
          break;
        }
      }
    }
  }
  return chunks;
}

int feature_dim(const std::vector<SpottingGame>& games) {
  int dim = -1;
  for (const SpottingGame& g : games)
    for (const HalfFeatures& h : g.halves) {
      if (h.frames.rows() == 0) continue;
      if (dim == -1) dim = int(h.frames.cols());
      if (int(h.frames.cols()) != dim)
        throw std::invalid_argument("inconsistent feature dimensions");
    }
  if (dim <= 0) throw std::invalid_argument("training set has no features");
  return dim;
}

// Up to `cap` random frames pooled across the corpus, for center seeding.
Mat sample_frames_for_init(const std::vector<const Mat*>& sources, int dim,
                           int cap, std::mt19937& rng) {
  Eigen::Index total = 0;
  for (const Mat* m : sources) total += m->rows();
  Eigen::Index take = std::min<Eigen::Index>(cap, total);
  Mat out(take, dim);
  if (take == 0) return out;
  std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);
  for (Eigen::Index i = 0; i < take; ++i) {
    Eigen::Index at = pick(rng);
    for (const Mat* m : sources) {
      if (at < m->rows()) {
        out.row(i) = m->row(at);
        break;
      }
      at -= m->rows();
    }
  }
  return out;
}

}  // namespace

SpottingTrainResult spotting_train(const std::vector<SpottingGame>& train,
                                   const std::vector<SpottingGame>& valid,
                                   AggregatorKind kind, int clusters,
                                   const TrainConfig& cfg,
                                   const TransferSpec& transfer) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  int dim = feature_dim(train);
  std::mt19937 rng(uint32_t(cfg.seed));

  std::vector<const Mat*> sources;
  for (const SpottingGame& g : train)
    for (const HalfFeatures& h : g.halves)
      if (h.frames.rows() > 0) sources.push_back(&h.frames);
  Mat seed_frames = sample_frames_for_init(sources, dim, 256, rng);

  SpottingTrainResult result;
  result.model = init_spotting_model(kind, clusters, dim, rng, &seed_frames);
  apply_transfer(&result.model.agg, transfer);

  TensorList trainable = tensors(result.model);
  if (agg_frozen(transfer)) trainable = drop_aggregator(trainable);
  AdamState adam = adam_init(trainable);

  // Fixed validation chunks so the plateau signal is comparable across epochs.
  std::mt19937 valid_rng(uint32_t(cfg.seed) ^ 0x9e3779b9u);
  std::vector<Chunk> valid_chunks =
      sample_chunks(valid, cfg.chunk_seconds, valid_rng);

  result.log = run_schedule(
      cfg, !valid_chunks.empty(),
      [&](double lr) {
        std::vector<Chunk> chunks = sample_chunks(train, cfg.chunk_seconds, rng);
        if (chunks.empty())
          throw std::invalid_argument(
              "no trainable chunks: halves shorter than chunk_seconds or no "
              "anchors");
        std::shuffle(chunks.begin(), chunks.end(), rng);
        double total = 0.0;
        for (const Chunk& ch : chunks) {
          SpottingModel grads = zeros_like(result.model);
          total += spotting_loss(ch.clip, ch.fg, result.model, &grads);
          TensorList gl = tensors(grads);
          if (agg_frozen(transfer)) gl = drop_aggregator(gl);
          adam_step(trainable, gl, &adam, lr);
        }
        return total / double(chunks.size());
      },
      [&] {
        double total = 0.0;
        for (const Chunk& ch : valid_chunks)
          total += spotting_loss(ch.clip, ch.fg, result.model, nullptr);
        return total / double(valid_chunks.size());
      });
  return result;
}

// ---------------------------------------------------------------- captioning

CaptionTrainResult caption_train(const std::vector<CaptionExample>& train,
                                 const std::vector<CaptionExample>& valid,
                                 AggregatorKind kind, int clusters, int vocab,
                                 const ModelDims& dims, const TrainConfig& cfg,
                                 const TransferSpec& transfer) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  int dim = int(train[0].clip.cols());
  for (const CaptionExample& ex : train)
    if (int(ex.clip.cols()) != dim)
      throw std::invalid_argument("inconsistent feature dimensions");
  std::mt19937 rng(uint32_t(cfg.seed));

  std::vector<const Mat*> sources;
  for (const CaptionExample& ex : train) sources.push_back(&ex.clip);
  Mat seed_frames = sample_frames_for_init(sources, dim, 256, rng);

  CaptionTrainResult result;
  result.model =
      init_captioning_model(kind, clusters, dim, vocab, dims, rng, &seed_frames);
  apply_transfer(&result.model.agg, transfer);

  TensorList trainable = tensors(result.model);
  if (agg_frozen(transfer)) trainable = drop_aggregator(trainable);
  AdamState adam = adam_init(trainable);

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  result.log = run_schedule(
      cfg, !valid.empty(),
      [&](double lr) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (size_t idx : order) {
          CaptioningModel grads = zeros_like(result.model);
          CaptionPassOptions opts;
          opts.train = true;
          opts.teacher_forcing = cfg.teacher_forcing_ratio;
          opts.rng = &rng;
          opts.forced_steps = &result.forced_steps;
          opts.free_steps = &result.free_steps;
          total += caption_pass(train[idx].clip, train[idx].tokens,
                                result.model, opts, &grads);
          TensorList gl = tensors(grads);
          if (agg_frozen(transfer)) gl = drop_aggregator(gl);
          adam_step(trainable, gl, &adam, lr);
        }
        return total / double(train.size());
      },
      [&] {
        double total = 0.0;
        for (const CaptionExample& ex : valid) {
          CaptionPassOptions opts;  // eval: no dropout, full teacher forcing
          total += caption_pass(ex.clip, ex.tokens, result.model, opts, nullptr);
        }
        return total / double(valid.size());
      });
  return result;
}

}  // namespace sdvc

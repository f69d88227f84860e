#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdvc/model.hpp"
#include "sdvc/text.hpp"

namespace sdvc {

Mat uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                 std::mt19937& rng);  // aggregator.cpp

namespace {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
  return 0.5 * (x * 0.5).tanh() + 0.5;  // stable for large |x|
}

// Stable per-output binary cross-entropy.
inline double bce(double z, double target) {
  return std::max(z, 0.0) - target * z + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

// ------------------------------------------------------------------ spotting

SpottingModel init_spotting_model(AggregatorKind kind, int clusters, int dim,
                                  std::mt19937& rng, const Mat* sample_frames) {
  SpottingModel m;
  m.agg = init_aggregator(kind, clusters, dim, rng, sample_frames);
  m.head.w = uniform_init(2, m.agg.output_dim(), m.agg.output_dim(), rng);
  m.head.b = Mat::Zero(2, 1);
  return m;
}

Eigen::Vector2d spotting_forward(const Mat& clip, const SpottingModel& m) {
  Vec y = aggregate(clip, m.agg);
  Vec z = m.head.w * y + m.head.b.col(0);
  return sigmoid(z.array()).matrix();
}

double spotting_loss(const Mat& clip, bool foreground, const SpottingModel& m,
                     SpottingModel* grads) {
  AggregatorCache cache;
  Vec y = aggregate_forward(clip, m.agg, &cache);
  Vec z = m.head.w * y + m.head.b.col(0);
  Eigen::Vector2d target(foreground ? 1.0 : 0.0, foreground ? 0.0 : 1.0);
  double loss = (bce(z(0), target(0)) + bce(z(1), target(1))) / 2.0;
  if (grads != nullptr) {
    Vec p = sigmoid(z.array()).matrix();
    Vec dz = (p - target) / 2.0;
    grads->head.w += dz * y.transpose();
    grads->head.b.col(0) += dz;
    Vec dy = m.head.w.transpose() * dz;
    aggregate_backward(dy, m.agg, cache, &grads->agg);
  }
  return loss;
}

TensorList tensors(SpottingModel& m) {
  TensorList list = tensors(m.agg);
  list.push_back({"head.w", &m.head.w});
  list.push_back({"head.b", &m.head.b});
  return list;
}

SpottingModel zeros_like(const SpottingModel& m) {
  SpottingModel z;
  z.agg = zeros_like(m.agg);
  z.head.w = Mat::Zero(m.head.w.rows(), m.head.w.cols());
  z.head.b = Mat::Zero(m.head.b.rows(), m.head.b.cols());
  return z;
}

// ---------------------------------------------------------------- captioning

CaptioningModel init_captioning_model(AggregatorKind kind, int clusters,
                                      int dim, int vocab, const ModelDims& dims,
                                      std::mt19937& rng,
                                      const Mat* sample_frames) {
  if (vocab <= int(Vocabulary::kUnk))
    throw std::invalid_argument("vocabulary too small");
  if (dims.layers < 1) throw std::invalid_argument("need at least one LSTM layer");
  if (dims.dropout < 0.0 || dims.dropout >= 1.0)
    throw std::invalid_argument("dropout rate must lie in [0, 1)");

  CaptioningModel m;
  m.agg = init_aggregator(kind, clusters, dim, rng, sample_frames);
  int in = m.agg.output_dim(), H = dims.hidden, E = dims.embed;
  m.head.fc1_w = uniform_init(H, in, in, rng);
  m.head.fc1_b = Mat::Zero(H, 1);
  m.head.fc2_w = uniform_init(H, H, H, rng);
  m.head.fc2_b = Mat::Zero(H, 1);
  m.head.dropout_rate = dims.dropout;
  m.head.embedding = uniform_init(vocab, E, E, rng);
  for (int l = 0; l < dims.layers; ++l) {
    LstmLayerParams layer;
    int input = l == 0 ? E : H;
    layer.wx = uniform_init(4 * H, input, input, rng);
    layer.wh = uniform_init(4 * H, H, H, rng);
    layer.b = Mat::Zero(4 * H, 1);
    layer.b.block(H, 0, H, 1).setOnes();  // forget-gate bias at 1
    m.head.lstm.push_back(std::move(layer));
  }
  m.head.proj_w = uniform_init(vocab, H, H, rng);
  m.head.proj_b = Mat::Zero(vocab, 1);
  return m;
}

namespace {

struct LayerCache {
  Vec x_in, h_prev, c_prev, i, f, g, o, c, tanh_c, h;
};
struct StepCache {
  int input_id = 0;
  std::vector<LayerCache> layers;
  Vec probs;
  int target = 0;
};

// One LSTM cell step; gate order input, forget, cell, output.
void lstm_step(const LstmLayerParams& p, const Vec& x, const Vec& h_prev,
               const Vec& c_prev, LayerCache* cc) {
  Eigen::Index H = p.wh.cols();
  Vec z = p.wx * x + p.wh * h_prev + p.b.col(0);
  cc->x_in = x;
  cc->h_prev = h_prev;
  cc->c_prev = c_prev;
  cc->i = sigmoid(z.segment(0, H).array()).matrix();
  cc->f = sigmoid(z.segment(H, H).array()).matrix();
  cc->g = z.segment(2 * H, H).array().tanh().matrix();
  cc->o = sigmoid(z.segment(3 * H, H).array()).matrix();
  cc->c = cc->f.cwiseProduct(c_prev) + cc->i.cwiseProduct(cc->g);
  cc->tanh_c = cc->c.array().tanh().matrix();
  cc->h = cc->o.cwiseProduct(cc->tanh_c);
}

// dh: gradient at this step's h. Returns dx_in; adds to dh_prev/dc_prev.
Vec lstm_step_backward(const LstmLayerParams& p, const LayerCache& cc,
                       const Vec& dh, const Vec& dc_in, Vec* dh_prev,
                       Vec* dc_prev, LstmLayerParams* grads) {
  Eigen::Index H = p.wh.cols();
  Vec dc = dc_in + dh.cwiseProduct(cc.o).cwiseProduct(
                       (1.0 - cc.tanh_c.array().square()).matrix());
  Vec dz(4 * H);
  dz.segment(0, H) = dc.cwiseProduct(cc.g).cwiseProduct(cc.i).cwiseProduct(
      (1.0 - cc.i.array()).matrix());
  dz.segment(H, H) = dc.cwiseProduct(cc.c_prev)
                         .cwiseProduct(cc.f)
                         .cwiseProduct((1.0 - cc.f.array()).matrix());
  dz.segment(2 * H, H) =
      dc.cwiseProduct(cc.i).cwiseProduct((1.0 - cc.g.array().square()).matrix());
  dz.segment(3 * H, H) = dh.cwiseProduct(cc.tanh_c)
                             .cwiseProduct(cc.o)
                             .cwiseProduct((1.0 - cc.o.array()).matrix());
  grads->wx += dz * cc.x_in.transpose();
  grads->wh += dz * cc.h_prev.transpose();
  grads->b.col(0) += dz;
  *dh_prev += p.wh.transpose() * dz;
  *dc_prev += dc.cwiseProduct(cc.f);
  return p.wx.transpose() * dz;
}

Vec stable_softmax(const Vec& logits, double* log_sum_exp) {
  double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp().matrix();
  double s = e.sum();
  if (log_sum_exp != nullptr) *log_sum_exp = m + std::log(s);
  return e / s;
}

}  // namespace

double caption_pass(const Mat& clip, const std::vector<int>& tokens,
                    const CaptioningModel& m, const CaptionPassOptions& opts,
                    CaptioningModel* grads) {
  const CaptioningHeadParams& head = m.head;
  int H = head.hidden(), V = head.vocab();
  size_t L = head.lstm.size();
  if (tokens.size() < 2)
    throw std::invalid_argument("caption needs at least BOS and EOS");
  for (int id : tokens)
    if (id < 0 || id >= V)
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside vocabulary of size " + std::to_string(V));
  if ((opts.fixed_mask1 == nullptr) != (opts.fixed_mask2 == nullptr))
    throw std::invalid_argument("fixed dropout masks come as a pair");
  if ((opts.train && opts.fixed_mask1 == nullptr) || opts.teacher_forcing < 1.0)
    if (opts.rng == nullptr)
      throw std::invalid_argument("rng required for dropout or forcing draws");

  // Clip projection: FC1 -> ReLU -> dropout -> FC2 -> ReLU -> dropout.
  AggregatorCache agg_cache;
  Vec y = aggregate_forward(clip, m.agg, &agg_cache);
  Vec mask1 = Vec::Ones(H), mask2 = Vec::Ones(H);
  if (opts.train) {
    if (opts.fixed_mask1 != nullptr) {
      mask1 = *opts.fixed_mask1;
      mask2 = *opts.fixed_mask2;
    } else {
      std::bernoulli_distribution keep(1.0 - head.dropout_rate);
      double scale = 1.0 / (1.0 - head.dropout_rate);
      for (int i = 0; i < H; ++i) mask1(i) = keep(*opts.rng) ? scale : 0.0;
      for (int i = 0; i < H; ++i) mask2(i) = keep(*opts.rng) ? scale : 0.0;
    }
  }
  Vec z1 = head.fc1_w * y + head.fc1_b.col(0);
  Vec u1 = z1.cwiseMax(0.0);
  Vec d1 = u1.cwiseProduct(mask1);
  Vec z2 = head.fc2_w * d1 + head.fc2_b.col(0);
  Vec u2 = z2.cwiseMax(0.0);
  Vec d2 = u2.cwiseProduct(mask2);

  std::vector<Vec> h(L, Vec::Zero(H)), c(L, Vec::Zero(H));
  h[0] = d2;  // FC output seeds layer 1 only

  size_t steps = tokens.size() - 1;
  std::vector<StepCache> cache(steps);
  double total_ce = 0.0;
  int prev_argmax = -1;
  std::bernoulli_distribution force(std::clamp(opts.teacher_forcing, 0.0, 1.0));
  for (size_t s = 0; s < steps; ++s) {
    int input_id = tokens[s];
    if (s > 0) {
      bool forced = opts.teacher_forcing >= 1.0 ||
                    (opts.teacher_forcing > 0.0 && force(*opts.rng));
      if (forced) {
        if (opts.forced_steps != nullptr) ++*opts.forced_steps;
      } else {
        input_id = prev_argmax;
        if (opts.free_steps != nullptr) ++*opts.free_steps;
      }
    }
    StepCache& sc = cache[s];
    sc.input_id = input_id;
    sc.target = tokens[s + 1];
    sc.layers.resize(L);
    Vec x = head.embedding.row(input_id).transpose();
    for (size_t l = 0; l < L; ++l) {
      lstm_step(head.lstm[l], x, h[l], c[l], &sc.layers[l]);
      h[l] = sc.layers[l].h;
      c[l] = sc.layers[l].c;
      x = h[l];
    }
    Vec logits = head.proj_w * h[L - 1] + head.proj_b.col(0);
    double lse = 0.0;
    sc.probs = stable_softmax(logits, &lse);
    total_ce += lse - logits(sc.target);
    prev_argmax = 0;
    logits.maxCoeff(&prev_argmax);
    if (opts.step_probs != nullptr) opts.step_probs->push_back(sc.probs);
  }
  double loss = total_ce / double(steps);

  if (grads == nullptr) return loss;

  CaptioningHeadParams& gh = grads->head;
  std::vector<Vec> dh_next(L, Vec::Zero(H)), dc_next(L, Vec::Zero(H));
  for (size_t s = steps; s-- > 0;) {
    StepCache& sc = cache[s];
    Vec dlogits = sc.probs / double(steps);
    dlogits(sc.target) -= 1.0 / double(steps);
    gh.proj_w += dlogits * sc.layers[L - 1].h.transpose();
    gh.proj_b.col(0) += dlogits;
    Vec dh_above = head.proj_w.transpose() * dlogits;
    for (size_t l = L; l-- > 0;) {
      Vec dh = dh_above + dh_next[l];
      Vec dc_in = dc_next[l];
      dh_next[l].setZero();
      dc_next[l].setZero();
      dh_above = lstm_step_backward(head.lstm[l], sc.layers[l], dh, dc_in,
                                    &dh_next[l], &dc_next[l],
                                    &gh.lstm[l]);
    }
    gh.embedding.row(sc.input_id) += dh_above.transpose();
  }

  // dh_next[0] is the gradient at h0 of layer 1, i.e. at d2; the other
  // layers started from constant zeros.
  Vec dd2 = dh_next[0];
  Vec dz2 = dd2.cwiseProduct(mask2)
                .cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
  gh.fc2_w += dz2 * d1.transpose();
  gh.fc2_b.col(0) += dz2;
  Vec dd1 = head.fc2_w.transpose() * dz2;
  Vec dz1 = dd1.cwiseProduct(mask1)
                .cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
  gh.fc1_w += dz1 * y.transpose();
  gh.fc1_b.col(0) += dz1;
  Vec dy = head.fc1_w.transpose() * dz1;
  aggregate_backward(dy, m.agg, agg_cache, &grads->agg);
  return loss;
}

std::vector<int> caption_greedy(const Mat& clip, const CaptioningModel& m,
                                int max_len) {
  const CaptioningHeadParams& head = m.head;
  int H = head.hidden();
  size_t L = head.lstm.size();

  Vec y = aggregate(clip, m.agg);
  Vec u1 = (head.fc1_w * y + head.fc1_b.col(0)).cwiseMax(0.0);
  Vec u2 = (head.fc2_w * u1 + head.fc2_b.col(0)).cwiseMax(0.0);
  std::vector<Vec> h(L, Vec::Zero(H)), c(L, Vec::Zero(H));
  h[0] = u2;

  std::vector<int> out;
  int id = int(Vocabulary::kBos);
  for (int step = 0; step < max_len; ++step) {
    Vec x = head.embedding.row(id).transpose();
    for (size_t l = 0; l < L; ++l) {
      LayerCache cc;
      lstm_step(head.lstm[l], x, h[l], c[l], &cc);
      h[l] = cc.h;
      c[l] = cc.c;
      x = h[l];
    }
    Vec logits = head.proj_w * h[L - 1] + head.proj_b.col(0);
    int next = 0;
    logits.maxCoeff(&next);
    if (next == int(Vocabulary::kEos)) break;
    out.push_back(next);
    id = next;
  }
  return out;
}

TensorList tensors(CaptioningModel& m) {
  TensorList list = tensors(m.agg);
  CaptioningHeadParams& h = m.head;
  list.push_back({"fc1.w", &h.fc1_w});
  list.push_back({"fc1.b", &h.fc1_b});
  list.push_back({"fc2.w", &h.fc2_w});
  list.push_back({"fc2.b", &h.fc2_b});
  list.push_back({"embedding", &h.embedding});
  for (size_t l = 0; l < h.lstm.size(); ++l) {
    std::string base = "lstm" + std::to_string(l) + ".";
    list.push_back({base + "wx", &h.lstm[l].wx});
    list.push_back({base + "wh", &h.lstm[l].wh});
    list.push_back({base + "b", &h.lstm[l].b});
  }
  list.push_back({"proj.w", &h.proj_w});
  list.push_back({"proj.b", &h.proj_b});
  return list;
}

CaptioningModel zeros_like(const CaptioningModel& m) {
  CaptioningModel z = m;
  z.agg = zeros_like(m.agg);
  for (auto& [name, mat] : tensors(z))
    if (name.rfind("agg.", 0) != 0) mat->setZero();
  return z;
}

// ----------------------------------------------------------------- inference

std::vector<SpotPrediction> spotting_infer(const HalfFeatures& half,
                                           int half_index,
                                           const SpottingModel& m,
                                           double chunk_seconds,
                                           double nms_seconds) {
  Eigen::Index w =
      std::max<Eigen::Index>(1, Eigen::Index(std::llround(chunk_seconds * half.fps)));
  if (half.frames.rows() < w) return {};
  std::vector<SpotPrediction> spots;
  for (Eigen::Index start = 0; start + w <= half.frames.rows(); ++start) {
    Eigen::Vector2d p = spotting_forward(half.frames.middleRows(start, w), m);
    if (p(0) <= p(1)) continue;  // background wins: no comment here
    double center = (double(start) + double(w) / 2.0) / half.fps;
    spots.push_back({{half_index, center}, p(0), ""});
  }
  return nms(std::move(spots), nms_seconds);
}

Mat trim_clip(const HalfFeatures& half, double t, double window_seconds) {
  Eigen::Index T = half.frames.rows();
  if (T == 0) return Mat(0, half.frames.cols());
  double lo = std::max(0.0, t - window_seconds / 2.0);
  double hi = std::min(double(T) / half.fps, t + window_seconds / 2.0);
  Eigen::Index first = Eigen::Index(std::floor(lo * half.fps));
  Eigen::Index last = Eigen::Index(std::ceil(hi * half.fps));
  first = std::clamp<Eigen::Index>(first, 0, T - 1);
  last = std::clamp<Eigen::Index>(last, first + 1, T);
  return half.frames.middleRows(first, last - first);
}

PredictionSet sdvc_infer(const std::string& game_id,
                         const std::vector<HalfFeatures>& halves,
                         const SpottingModel& spot,
                         const CaptioningModel& capt, const Vocabulary& vocab,
                         double chunk_seconds, double nms_seconds,
                         double caption_window_seconds) {
  PredictionSet set;
  set.game_id = game_id;
  for (size_t h = 0; h < halves.size(); ++h) {
    std::vector<SpotPrediction> spots =
        spotting_infer(halves[h], int(h) + 1, spot, chunk_seconds, nms_seconds);
    for (SpotPrediction& s : spots) {
      Mat clip = trim_clip(halves[h], s.clock.seconds, caption_window_seconds);
      if (clip.rows() == 0) continue;
      std::vector<int> ids = caption_greedy(clip, capt);
      s.comment = join_tokens(vocab.decode(ids));
      set.spots.push_back(std::move(s));
    }
  }
  return set;
}

}  // namespace sdvc

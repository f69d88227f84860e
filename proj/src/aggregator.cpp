#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sdvc/model.hpp"

namespace sdvc {

std::string aggregator_kind_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::NetVLAD: return "netvlad";
    case AggregatorKind::NetRVLAD: return "netrvlad";
    case AggregatorKind::NetVLADpp: return "netvlad++";
    case AggregatorKind::NetRVLADpp: return "netrvlad++";
  }
  throw std::logic_error("bad aggregator kind");
}

AggregatorKind aggregator_kind_from_name(const std::string& name) {
  if (name == "netvlad") return AggregatorKind::NetVLAD;
  if (name == "netrvlad") return AggregatorKind::NetRVLAD;
  if (name == "netvlad++") return AggregatorKind::NetVLADpp;
  if (name == "netrvlad++") return AggregatorKind::NetRVLADpp;
  throw std::runtime_error("unknown aggregator kind \"" + name + "\"");
}

bool is_split_kind(AggregatorKind kind) {
  return kind == AggregatorKind::NetVLADpp || kind == AggregatorKind::NetRVLADpp;
}

static bool has_centers(AggregatorKind kind) {
  return kind == AggregatorKind::NetVLAD || kind == AggregatorKind::NetVLADpp;
}

// Scaled-uniform fan-in init, the shared convention for every linear map.
Mat uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                 std::mt19937& rng) {
  double s = 1.0 / std::sqrt(double(std::max<Eigen::Index>(fan_in, 1)));
  std::uniform_real_distribution<double> u(-s, s);
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

AggregatorParams init_aggregator(AggregatorKind kind, int clusters, int dim,
                                 std::mt19937& rng, const Mat* sample_frames) {
  if (clusters < 1) throw std::invalid_argument("clusters must be >= 1");
  if (is_split_kind(kind) && clusters % 2 != 0)
    throw std::invalid_argument("++ aggregators need an even cluster count");
  if (dim < 1) throw std::invalid_argument("feature dim must be >= 1");

  AggregatorParams p;
  p.kind = kind;
  p.clusters = clusters;
  p.dim = dim;
  int n_cores = is_split_kind(kind) ? 2 : 1;
  int per_core = clusters / n_cores;
  for (int c = 0; c < n_cores; ++c) {
    AggregatorCore core;
    core.assign_w = uniform_init(per_core, dim, dim, rng);
    core.assign_b = Mat::Zero(per_core, 1);
    if (has_centers(kind)) {
      if (sample_frames != nullptr && sample_frames->rows() >= per_core &&
          sample_frames->cols() == dim) {
        // k-means-style seeding: distinct sampled frames as centers.
        std::vector<Eigen::Index> idx(size_t(sample_frames->rows()));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        core.centers = Mat(per_core, dim);
        for (int k = 0; k < per_core; ++k)
          core.centers.row(k) = sample_frames->row(idx[size_t(k)]);
      } else {
        core.centers = uniform_init(per_core, dim, dim, rng);
      }
    }
    p.cores.push_back(std::move(core));
  }
  return p;
}

namespace {

// Row-wise softmax with max-shift.
Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::RowVectorXd row = logits.row(t);
    double m = row.maxCoeff();
    Eigen::RowVectorXd e = (row.array() - m).exp();
    out.row(t) = e / e.sum();
  }
  return out;
}

void core_forward(const Mat& frames, const AggregatorCore& core, bool vlad,
                  AggregatorCoreCache* cache) {
  Mat logits = frames * core.assign_w.transpose();
  logits.rowwise() += core.assign_b.col(0).transpose();
  Mat assign = softmax_rows(logits);  // T x K

  Eigen::Index K = core.assign_w.rows();
  Mat pooled = assign.transpose() * frames;  // K x D, the RVLAD sum
  if (vlad) {
    // V_k = sum_t a_tk (x_t - C_k) = (sum over t of a_tk x_t) - (col sum) C_k
    Vec mass = assign.colwise().sum().transpose();
    pooled -= mass.asDiagonal() * core.centers;
  }

  Vec intra(K);
  Mat unit = pooled;
  for (Eigen::Index k = 0; k < K; ++k) {
    intra(k) = pooled.row(k).norm();
    if (intra(k) > 0.0) unit.row(k) /= intra(k);
  }
  cache->frames = frames;
  cache->assign = std::move(assign);
  cache->pooled = std::move(pooled);
  cache->intra_norm = std::move(intra);
  cache->unit = std::move(unit);
}

// dunit: K x D gradient at the per-cluster-normalized pooled matrix.
Mat core_backward(const Mat& dunit, const AggregatorCore& core, bool vlad,
                  const AggregatorCoreCache& cache, AggregatorCore* grads) {
  Eigen::Index K = core.assign_w.rows();
  Mat dpooled(K, cache.frames.cols());
  for (Eigen::Index k = 0; k < K; ++k) {
    double n = cache.intra_norm(k);
    if (n > 0.0) {
      double along = cache.pooled.row(k).dot(dunit.row(k));
      dpooled.row(k) = dunit.row(k) / n - cache.pooled.row(k) * (along / (n * n * n));
    } else {
      dpooled.row(k) = dunit.row(k);
    }
  }

  // d assign[t][k] = dV_k . r_tk;  dX_t += sum_k a_tk dV_k.
  Mat dassign;  // T x K
  if (vlad) {
    dassign = cache.frames * dpooled.transpose() -
              Mat::Ones(cache.frames.rows(), 1) *
                  (dpooled.cwiseProduct(core.centers)).rowwise().sum().transpose();
    Vec mass = cache.assign.colwise().sum().transpose();
    grads->centers -= mass.asDiagonal() * dpooled;
  } else {
    dassign = cache.frames * dpooled.transpose();
  }
  Mat dframes = cache.assign * dpooled;

  // Softmax rows: dlogit = a .* (dassign - rowdot(a, dassign)).
  Vec rowdot = (cache.assign.cwiseProduct(dassign)).rowwise().sum();
  Mat dlogits = cache.assign.cwiseProduct(dassign.colwise() - rowdot);

  grads->assign_w += dlogits.transpose() * cache.frames;
  grads->assign_b.col(0) += dlogits.colwise().sum().transpose();
  dframes += dlogits * core.assign_w;
  return dframes;
}

}  // namespace

Vec aggregate_forward(const Mat& frames, const AggregatorParams& p,
                      AggregatorCache* cache) {
  bool split = is_split_kind(p.kind);
  if (frames.cols() != p.dim)
    throw std::invalid_argument("frame dim " + std::to_string(frames.cols()) +
                                " does not match aggregator dim " +
                                std::to_string(p.dim));
  Eigen::Index min_rows = split ? 2 : 1;
  if (frames.rows() < min_rows)
    throw std::invalid_argument("clip too short for aggregator: " +
                                std::to_string(frames.rows()) + " frame(s)");

  AggregatorCache local;
  AggregatorCache* c = cache != nullptr ? cache : &local;
  c->cores.assign(p.cores.size(), {});
  bool vlad = has_centers(p.kind);

  if (split) {
    Eigen::Index mid = (frames.rows() + 1) / 2;  // extra frame to the earlier half
    core_forward(frames.topRows(mid), p.cores[0], vlad, &c->cores[0]);
    core_forward(frames.bottomRows(frames.rows() - mid), p.cores[1], vlad,
                 &c->cores[1]);
  } else {
    core_forward(frames, p.cores[0], vlad, &c->cores[0]);
  }

  Vec flat(p.output_dim());
  Eigen::Index at = 0;
  for (const AggregatorCoreCache& cc : c->cores) {
    for (Eigen::Index k = 0; k < cc.unit.rows(); ++k) {
      flat.segment(at, cc.unit.cols()) = cc.unit.row(k).transpose();
      at += cc.unit.cols();
    }
  }
  c->flat = flat;
  c->global_norm = flat.norm();
  if (c->global_norm > 0.0) flat /= c->global_norm;
  return flat;
}

Mat aggregate_backward(const Vec& dout, const AggregatorParams& p,
                       const AggregatorCache& cache, AggregatorParams* grads) {
  Vec dflat;
  double g = cache.global_norm;
  if (g > 0.0) {
    double along = cache.flat.dot(dout);
    dflat = dout / g - cache.flat * (along / (g * g * g));
  } else {
    dflat = dout;
  }

  bool vlad = has_centers(p.kind);
  Eigen::Index at = 0;
  std::vector<Mat> dframes_parts;
  for (size_t ci = 0; ci < p.cores.size(); ++ci) {
    const AggregatorCoreCache& cc = cache.cores[ci];
    Mat dunit(cc.unit.rows(), cc.unit.cols());
    for (Eigen::Index k = 0; k < cc.unit.rows(); ++k) {
      dunit.row(k) = dflat.segment(at, cc.unit.cols()).transpose();
      at += cc.unit.cols();
    }
    dframes_parts.push_back(
        core_backward(dunit, p.cores[ci], vlad, cc, &grads->cores[ci]));
  }

  if (dframes_parts.size() == 1) return dframes_parts[0];
  Mat dframes(dframes_parts[0].rows() + dframes_parts[1].rows(), p.dim);
  dframes << dframes_parts[0], dframes_parts[1];
  return dframes;
}

TensorList tensors(AggregatorParams& p, const std::string& prefix) {
  TensorList list;
  for (size_t c = 0; c < p.cores.size(); ++c) {
    std::string base = prefix + "core" + std::to_string(c) + ".";
    list.push_back({base + "assign_w", &p.cores[c].assign_w});
    list.push_back({base + "assign_b", &p.cores[c].assign_b});
    if (p.cores[c].centers.size() > 0)
      list.push_back({base + "centers", &p.cores[c].centers});
  }
  return list;
}

AggregatorParams zeros_like(const AggregatorParams& p) {
  AggregatorParams z = p;
  for (AggregatorCore& core : z.cores) {
    core.assign_w.setZero();
    core.assign_b.setZero();
    if (core.centers.size() > 0) core.centers.setZero();
  }
  return z;
}

}  // namespace sdvc

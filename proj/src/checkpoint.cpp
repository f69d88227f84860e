#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sdvc/checkpoint.hpp"

namespace sdvc {

namespace {

void put_u32(std::string* out, uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out->append(b, 4);
}

struct Reader {
  const std::string& bytes;
  const std::string& path;
  size_t at = 0;
  void need(size_t n, const char* what) {
    if (at + n > bytes.size())
      throw std::runtime_error(path + ": truncated checkpoint (" + what + ")");
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = uint32_t(uint8_t(bytes[at])) |
                 uint32_t(uint8_t(bytes[at + 1])) << 8 |
                 uint32_t(uint8_t(bytes[at + 2])) << 16 |
                 uint32_t(uint8_t(bytes[at + 3])) << 24;
    at += 4;
    return v;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

TrainConfig config_from_json(const ordered_json& o) {
  TrainConfig cfg;
  cfg.lr_init = o.value("lr_init", cfg.lr_init);
  cfg.lr_factor = o.value("lr_factor", cfg.lr_factor);
  cfg.plateau_patience = o.value("plateau_patience", cfg.plateau_patience);
  cfg.lr_stop = o.value("lr_stop", cfg.lr_stop);
  cfg.chunk_seconds = o.value("chunk_seconds", cfg.chunk_seconds);
  cfg.caption_window_seconds =
      o.value("caption_window_seconds", cfg.caption_window_seconds);
  cfg.nms_seconds = o.value("nms_seconds", cfg.nms_seconds);
  cfg.teacher_forcing_ratio =
      o.value("teacher_forcing_ratio", cfg.teacher_forcing_ratio);
  cfg.seed = o.value("seed", cfg.seed);
  cfg.max_epochs = o.value("max_epochs", cfg.max_epochs);
  return cfg;
}

std::string fingerprint_hex(uint64_t fp) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fp);
  return buf;
}

uint64_t fingerprint_from_hex(const std::string& hex) {
  return std::strtoull(hex.c_str(), nullptr, 16);
}

std::vector<NamedTensor> model_tensors(const TensorList& list) {
  std::vector<NamedTensor> out;
  for (const auto& [name, mat] : list) {
    NamedTensor t;
    t.name = name;
    t.shape = {uint32_t(mat->rows()), uint32_t(mat->cols())};
    t.data.reserve(size_t(mat->size()));
    for (Eigen::Index r = 0; r < mat->rows(); ++r)
      for (Eigen::Index c = 0; c < mat->cols(); ++c)
        t.data.push_back(float((*mat)(r, c)));
    out.push_back(std::move(t));
  }
  return out;
}

ordered_json sidecar_common(const AggregatorParams& agg, const TrainConfig& cfg,
                            uint64_t vocab_fingerprint) {
  ordered_json o;
  o["aggregator"] = aggregator_kind_name(agg.kind);
  o["clusters"] = agg.clusters;
  o["dim"] = agg.dim;
  o["config"] = cfg.to_json();
  o["vocabulary_fingerprint"] = fingerprint_hex(vocab_fingerprint);
  return o;
}

ordered_json read_sidecar(const std::string& path, const std::string& model) {
  std::ifstream in(path + ".json");
  if (!in) throw std::runtime_error(path + ".json: cannot open sidecar");
  ordered_json o = ordered_json::parse(in);
  if (o.value("model", "") != model)
    throw std::runtime_error(path + ".json: sidecar describes a \"" +
                             o.value("model", std::string("?")) +
                             "\" model, expected \"" + model + "\"");
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors) {
  std::string out;
  put_u32(&out, kCheckpointMagic);
  put_u32(&out, kCheckpointVersion);
  put_u32(&out, uint32_t(tensors.size()));
  for (const NamedTensor& t : tensors) {
    put_u32(&out, uint32_t(t.name.size()));
    out += t.name;
    put_u32(&out, uint32_t(t.shape.size()));
    size_t count = 1;
    for (uint32_t d : t.shape) {
      put_u32(&out, d);
      count *= d;
    }
    if (count != t.data.size())
      throw std::invalid_argument("tensor \"" + t.name +
                                  "\" shape does not match its payload");
    static_assert(sizeof(float) == 4);
    size_t base = out.size();
    out.resize(base + 4 * t.data.size());
    std::memcpy(out.data() + base, t.data.data(), 4 * t.data.size());
  }
  write_text(path, out);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::string bytes = slurp(path);
  Reader r{bytes, path};
  if (r.u32("magic") != kCheckpointMagic)
    throw std::runtime_error(path + ": bad checkpoint magic");
  uint32_t version = r.u32("version");
  if (version != kCheckpointVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  uint32_t n = r.u32("tensor count");
  std::vector<NamedTensor> tensors;
  for (uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    uint32_t name_len = r.u32("name length");
    r.need(name_len, "name");
    t.name = bytes.substr(r.at, name_len);
    r.at += name_len;
    uint32_t rank = r.u32("rank");
    size_t count = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(r.u32("shape"));
      count *= t.shape.back();
    }
    r.need(4 * count, "tensor payload");
    t.data.resize(count);
    std::memcpy(t.data.data(), bytes.data() + r.at, 4 * count);
    r.at += 4 * count;
    tensors.push_back(std::move(t));
  }
  if (r.at != bytes.size())
    throw std::runtime_error(path + ": trailing bytes after checkpoint");
  return tensors;
}

void load_into(const TensorList& targets, const std::vector<NamedTensor>& src) {
  if (targets.size() != src.size())
    throw std::runtime_error("checkpoint tensor count " +
                             std::to_string(src.size()) + " does not match model (" +
                             std::to_string(targets.size()) + ")");
  for (size_t i = 0; i < targets.size(); ++i) {
    const NamedTensor* found = nullptr;
    for (const NamedTensor& t : src)
      if (t.name == targets[i].first) {
        found = &t;
        break;
      }
    if (found == nullptr)
      throw std::runtime_error("checkpoint is missing tensor \"" +
                               targets[i].first + "\"");
    Mat& dst = *targets[i].second;
    if (found->shape.size() != 2 || found->shape[0] != uint32_t(dst.rows()) ||
        found->shape[1] != uint32_t(dst.cols()))
      throw std::runtime_error("checkpoint tensor \"" + found->name +
                               "\" has the wrong shape");
    size_t at = 0;
    for (Eigen::Index r = 0; r < dst.rows(); ++r)
      for (Eigen::Index c = 0; c < dst.cols(); ++c)
        dst(r, c) = double(found->data[at++]);
  }
}

void save_spotting_model(const std::string& path, const SpottingModel& m,
                         const TrainConfig& cfg, uint64_t vocab_fingerprint) {
  // tensors() only reads through the pointers here.
  TensorList list = tensors(const_cast<SpottingModel&>(m));
  save_checkpoint(path, model_tensors(list));
  ordered_json side = sidecar_common(m.agg, cfg, vocab_fingerprint);
  side["model"] = "spotting";
  write_text(path + ".json", side.dump(2) + "\n");
}

SpottingModel load_spotting_model(const std::string& path, TrainConfig* cfg_out) {
  ordered_json side = read_sidecar(path, "spotting");
  std::mt19937 rng(0);  // placeholder values, fully overwritten below
  SpottingModel m = init_spotting_model(
      aggregator_kind_from_name(side.at("aggregator").get<std::string>()),
      side.at("clusters").get<int>(), side.at("dim").get<int>(), rng);
  load_into(tensors(m), load_checkpoint(path));
  if (cfg_out != nullptr) *cfg_out = config_from_json(side.value("config", ordered_json::object()));
  return m;
}

void save_captioning_model(const std::string& path, const CaptioningModel& m,
                           const TrainConfig& cfg, uint64_t vocab_fingerprint) {
  TensorList list = tensors(const_cast<CaptioningModel&>(m));
  save_checkpoint(path, model_tensors(list));
  ordered_json side = sidecar_common(m.agg, cfg, vocab_fingerprint);
  side["model"] = "captioning";
  side["vocab"] = m.head.vocab();
  side["hidden"] = m.head.hidden();
  side["embed"] = m.head.embed_dim();
  side["layers"] = m.head.lstm.size();
  side["dropout_rate"] = m.head.dropout_rate;
  write_text(path + ".json", side.dump(2) + "\n");
}

CaptioningModel load_captioning_model(const std::string& path,
                                      TrainConfig* cfg_out,
                                      uint64_t* vocab_fingerprint) {
  ordered_json side = read_sidecar(path, "captioning");
  ModelDims dims;
  dims.hidden = side.at("hidden").get<int>();
  dims.embed = side.at("embed").get<int>();
  dims.layers = side.at("layers").get<int>();
  std::mt19937 rng(0);
  CaptioningModel m = init_captioning_model(
      aggregator_kind_from_name(side.at("aggregator").get<std::string>()),
      side.at("clusters").get<int>(), side.at("dim").get<int>(),
      side.at("vocab").get<int>(), dims, rng);
  m.head.dropout_rate = side.value("dropout_rate", m.head.dropout_rate);
  load_into(tensors(m), load_checkpoint(path));
  if (cfg_out != nullptr)
    *cfg_out = config_from_json(side.value("config", ordered_json::object()));
  if (vocab_fingerprint != nullptr)
    *vocab_fingerprint =
        fingerprint_from_hex(side.value("vocabulary_fingerprint", "0"));
  return m;
}

}  // namespace sdvc

#pragma once

#include <string>
#include <vector>

#include "sdvc/model.hpp"
#include "sdvc/train.hpp"

namespace sdvc {

// Checkpoint container: "SNCK" magic, u32 version, u32 tensor count, then per
// tensor {u32 name length, name bytes, u32 rank, u32 dims[rank], row-major
// float32 payload}; all integers and floats little-endian. A JSON sidecar at
// <path>.json echoes the model geometry, the TrainConfig, and the vocabulary
// fingerprint.
inline constexpr uint32_t kCheckpointMagic = 0x4b434e53;  // "SNCK"
inline constexpr uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;  // row-major
};

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

// Copies checkpoint tensors into the model tensors by name; every name must
// match with identical shape on both sides.
void load_into(const TensorList& targets, const std::vector<NamedTensor>& src);

void save_spotting_model(const std::string& path, const SpottingModel& m,
                         const TrainConfig& cfg, uint64_t vocab_fingerprint = 0);
SpottingModel load_spotting_model(const std::string& path,
                                  TrainConfig* cfg_out = nullptr);

void save_captioning_model(const std::string& path, const CaptioningModel& m,
                           const TrainConfig& cfg, uint64_t vocab_fingerprint);
CaptioningModel load_captioning_model(const std::string& path,
                                      TrainConfig* cfg_out = nullptr,
                                      uint64_t* vocab_fingerprint = nullptr);

}  // namespace sdvc

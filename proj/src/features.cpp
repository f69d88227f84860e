#include "sdvc/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sdvc {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

FeatureMatrix load_features(const std::string& path, int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file " + path);
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (bytes.size() < 16)
    throw std::runtime_error(path + ": truncated header (" +
                             std::to_string(bytes.size()) + " bytes)");
  if (read_u32(bytes.data()) != kFeatureMagic)
    throw std::runtime_error(path + ": bad magic, not a feature file");
  uint32_t version = read_u32(bytes.data() + 4);
  if (version != kFeatureVersion)
    throw std::runtime_error(path + ": unsupported version " +
                             std::to_string(version));
  uint32_t rows = read_u32(bytes.data() + 8);
  uint32_t dim = read_u32(bytes.data() + 12);
  if (expected_dim > 0 && dim != uint32_t(expected_dim))
    throw std::runtime_error(path + ": feature dimension " + std::to_string(dim) +
                             ", expected " + std::to_string(expected_dim));
  size_t want = 16 + size_t(rows) * dim * 4;
  if (bytes.size() < want)
    throw std::runtime_error(path + ": truncated payload, expected " +
                             std::to_string(want) + " bytes, got " +
                             std::to_string(bytes.size()));
  if (bytes.size() > want)
    throw std::runtime_error(path + ": " + std::to_string(bytes.size() - want) +
                             " trailing bytes after payload");

  FeatureMatrix m(rows, dim);
  // float32 little-endian; this targets little-endian hosts only.
  std::memcpy(m.data(), bytes.data() + 16, size_t(rows) * dim * 4);
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < dim; ++c)
      if (!std::isfinite(m(r, c)))
        throw std::runtime_error(path + ": non-finite value at row " +
                                 std::to_string(r) + ", col " + std::to_string(c));
  return m;
}

void save_features(const std::string& path, const FeatureMatrix& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write feature file " + path);
  write_u32(out, kFeatureMagic);
  write_u32(out, kFeatureVersion);
  write_u32(out, uint32_t(features.rows()));
  write_u32(out, uint32_t(features.cols()));
  out.write(reinterpret_cast<const char*>(features.data()),
            std::streamsize(features.size()) * 4);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace sdvc

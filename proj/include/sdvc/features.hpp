#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace sdvc {

// Row-major float matrix: one row per one-second frame feature.
using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr uint32_t kFeatureMagic = 0x46434E53;  // "SNCF" little-endian
inline constexpr uint32_t kFeatureVersion = 1;
inline constexpr int kDefaultFeatureDim = 512;

// Reads a feature file: 16-byte header (magic, version, rows T, dim D),
// then T*D little-endian float32 values, row major. Throws std::runtime_error
// on bad magic/version, truncation, trailing bytes, NaN values, or a dim
// mismatch when expected_dim > 0.
FeatureMatrix load_features(const std::string& path,
                            int expected_dim = kDefaultFeatureDim);

void save_features(const std::string& path, const FeatureMatrix& features);

}  // namespace sdvc

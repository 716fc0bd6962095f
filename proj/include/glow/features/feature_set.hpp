// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_FEATURES_FEATURE_SET_HPP_
#define GLOW_FEATURES_FEATURE_SET_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glow/num/matrix.hpp"

namespace glow {

struct ImageSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Keypoints and descriptors of one image. Stored at 32-bit so that the
/// on-disk container round-trips exactly.
struct FeatureSet {
  ImageSize image_size;
  Matrix<float> points;       // N x 2, pixel coordinates
  Matrix<float> descriptors;  // N x d_in
  std::vector<float> scores;  // empty, or one detection score per point

  std::size_t size() const { return points.rows(); }
  std::size_t descriptor_dim() const { return descriptors.cols(); }

  /// Throws InvalidInput when an invariant is broken.
  void validate() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// Aspect-preserving map of pixel coordinates into [-1, 1]: the image centre
/// goes to the origin and the longer side spans [-1, 1].
template <typename T>
struct NormalizedPoints {
  Matrix<T> coords;  // N x 2
  double scale = 1;  // 2 / max(width, height)
  double center_x = 0;
  double center_y = 0;
};

template <typename T>
NormalizedPoints<T> normalize_points(const FeatureSet& fs);

template <typename T>
Matrix<double> denormalize_points(const NormalizedPoints<T>& np);

// Container layout (little-endian):
//   "GLFM" | u32 version = 1 | u32 width | u32 height | u32 N | u32 d_in |
//   u32 flags (bit 0: scores present) |
//   N*2 f32 points (x, y row-major) | N*d_in f32 descriptors | [N f32 scores]
std::vector<std::uint8_t> encode_features(const FeatureSet& fs);
FeatureSet decode_features(std::span<const std::uint8_t> bytes);

FeatureSet read_features(const std::filesystem::path& path);
void write_features(const FeatureSet& fs, const std::filesystem::path& path);

}  // namespace glow

#endif  // GLOW_FEATURES_FEATURE_SET_HPP_

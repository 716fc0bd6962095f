// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/features/feature_set.hpp"

#include <algorithm>
#include <cmath>

#include "glow/io/binary.hpp"

namespace glow {
namespace {

constexpr std::string_view kMagic = "GLFM";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagScores = 1u;

}  // namespace

void FeatureSet::validate() const {
  if (points.cols() != 2 && points.rows() != 0) throw InvalidInput("FeatureSet: points must be N x 2");
  if (descriptors.rows() != points.rows())
    throw InvalidInput("FeatureSet: descriptor count " + std::to_string(descriptors.rows()) +
                       " != point count " + std::to_string(points.rows()));
  if (!scores.empty() && scores.size() != points.rows())
    throw InvalidInput("FeatureSet: score count != point count");
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const float x = points(i, 0), y = points(i, 1);
    if (!(x >= 0.0f && x <= float(image_size.width) && y >= 0.0f && y <= float(image_size.height)))
      throw InvalidInput("FeatureSet: point " + std::to_string(i) + " outside the image");
  }
  if (!descriptors.all_finite()) throw InvalidInput("FeatureSet: non-finite descriptor");
}

template <typename T>
NormalizedPoints<T> normalize_points(const FeatureSet& fs) {
  if (fs.image_size.width == 0 || fs.image_size.height == 0)
    throw InvalidInput("normalize_points: image dimensions must be positive");
  NormalizedPoints<T> np;
  np.center_x = 0.5 * double(fs.image_size.width);
  np.center_y = 0.5 * double(fs.image_size.height);
  np.scale = 2.0 / double(std::max(fs.image_size.width, fs.image_size.height));
  np.coords = Matrix<T>(fs.size(), 2);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    np.coords(i, 0) = T((double(fs.points(i, 0)) - np.center_x) * np.scale);
    np.coords(i, 1) = T((double(fs.points(i, 1)) - np.center_y) * np.scale);
  }
  return np;
}

template <typename T>
Matrix<double> denormalize_points(const NormalizedPoints<T>& np) {
  Matrix<double> out(np.coords.rows(), 2);
  for (std::size_t i = 0; i < np.coords.rows(); ++i) {
    out(i, 0) = double(np.coords(i, 0)) / np.scale + np.center_x;
    out(i, 1) = double(np.coords(i, 1)) / np.scale + np.center_y;
  }
  return out;
}

std::vector<std::uint8_t> encode_features(const FeatureSet& fs) {
  fs.validate();
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(fs.image_size.width);
  w.u32(fs.image_size.height);
  w.u32(std::uint32_t(fs.size()));
  w.u32(std::uint32_t(fs.descriptor_dim()));
  w.u32(fs.scores.empty() ? 0u : kFlagScores);
  for (float v : fs.points.values()) w.f32(v);
  for (float v : fs.descriptors.values()) w.f32(v);
  for (float v : fs.scores) w.f32(v);
  return w.take();
}

FeatureSet decode_features(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4) != kMagic)
    throw FormatError(FormatErrorCode::kBadMagic, 0, "expected GLFM");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError(FormatErrorCode::kUnsupportedVersion, 4, "version " + std::to_string(version));
  FeatureSet fs;
  fs.image_size.width = r.u32();
  fs.image_size.height = r.u32();
  const std::uint32_t n = r.u32();
  const std::uint32_t dim = r.u32();
  const std::size_t flags_at = r.offset();
  const std::uint32_t flags = r.u32();
  if ((flags & ~kFlagScores) != 0)
    throw FormatError(FormatErrorCode::kBadHeader, flags_at, "unknown flags");
  if (fs.image_size.width == 0 || fs.image_size.height == 0)
    throw FormatError(FormatErrorCode::kBadHeader, 8, "zero image dimension");

  const std::size_t point_bytes = std::size_t(n) * 2 * 4;
  const std::size_t desc_bytes = std::size_t(n) * dim * 4;
  const std::size_t score_bytes = (flags & kFlagScores) ? std::size_t(n) * 4 : 0;
  if (r.remaining() < point_bytes)
    throw FormatError(FormatErrorCode::kTruncated, r.offset() + r.remaining(), "points");
  const std::size_t desc_at = r.offset() + point_bytes;
  const std::size_t payload = r.remaining() - point_bytes;
  if (payload != desc_bytes + score_bytes) {
    if (payload > desc_bytes + score_bytes && n > 0 && (payload - score_bytes) % (std::size_t(n) * 4) == 0) {
      throw FormatError(FormatErrorCode::kDescriptorWidthMismatch, desc_at,
                        "header width " + std::to_string(dim) + ", payload holds " +
                            std::to_string((payload - score_bytes) / (std::size_t(n) * 4)));
    }
    if (payload < desc_bytes + score_bytes)
      throw FormatError(FormatErrorCode::kTruncated, bytes.size(),
                        "expected " + std::to_string(desc_bytes + score_bytes) + " payload bytes");
    throw FormatError(FormatErrorCode::kTrailingBytes, desc_at + desc_bytes + score_bytes, "");
  }
  fs.points = Matrix<float>(n, 2);
  for (auto& v : fs.points.values()) v = r.f32();
  fs.descriptors = Matrix<float>(n, dim);
  for (auto& v : fs.descriptors.values()) v = r.f32();
  if (flags & kFlagScores) {
    fs.scores.resize(n);
    for (auto& v : fs.scores) v = r.f32();
  }
  try {
    fs.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(FormatErrorCode::kBadValue, 28, e.what());
  }
  return fs;
}

FeatureSet read_features(const std::filesystem::path& path) { return decode_features(read_file(path)); }

void write_features(const FeatureSet& fs, const std::filesystem::path& path) {
  write_file_atomic(path, encode_features(fs));
}

template NormalizedPoints<float> normalize_points<float>(const FeatureSet&);
template NormalizedPoints<double> normalize_points<double>(const FeatureSet&);
template Matrix<double> denormalize_points(const NormalizedPoints<float>&);
template Matrix<double> denormalize_points(const NormalizedPoints<double>&);

}  // namespace glow

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_SYNTH_SYNTHGEN_HPP_
#define GLOW_SYNTH_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "glow/features/feature_set.hpp"
#include "glow/geometry/homography.hpp"
#include "glow/train/labels.hpp"

namespace glow {

inline constexpr ImageSize kSynthFrame{640, 480};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Warp strength. Each target corner moves inward by up to
/// perspective * (half width, half height); the quad then turns by up to
/// rotation_deg about its centroid and shifts by up to `translation` times
/// the slack left inside the frame.
struct Difficulty {
  double perspective = 0.4;   // [0, 1]
  double rotation_deg = 20;   // [0, 45]
  double translation = 1.0;   // [0, 1]

  void validate() const;
};

struct HomographySample {
  Homography h = Homography::Identity();  // source quad -> target quad
  std::array<Point2, 4> source;
  std::array<Point2, 4> target;
  std::size_t convexity_rejections = 0;
  std::size_t bounds_rejections = 0;
};

/// Strictly convex, consistently oriented quad.
bool is_convex(const std::array<Point2, 4>& quad);

/// One of the two directions (frame -> warped quad, or its inverse) with
/// equal probability. Throws GenerationError after too many rejections.
HomographySample sample_homography(std::mt19937_64& rng, const Difficulty& difficulty,
                                   ImageSize frame = kSynthFrame);

struct PairSpec {
  std::size_t points = 512;        // per image
  double inlier_ratio = 0.6;       // (0, 1]
  double noise = 0.3;              // descriptor noise level
  std::size_t descriptor_dim = 10;
  Difficulty difficulty;

  void validate() const;
};

enum class Preset { kEasy, kMedium, kHard };
PairSpec preset_spec(Preset preset, std::size_t points = 512, std::size_t descriptor_dim = 10);
Preset parse_preset(const std::string& name);
std::string preset_name(Preset preset);

struct SynthPair {
  FeatureSet a;
  FeatureSet b;
  GroundTruth gt;
  PairSpec spec;
  std::size_t inliers = 0;  // latent points seen by both images
};

/// Inlier latent points are drawn in A, mapped into B, jittered by at most
/// 0.5 px and kept only if they stay in frame, lie within 3 px of their
/// partner and more than 5 px from every other point (symmetric error).
/// Outliers are placed more than 5 px from every counterpart. Descriptors
/// are normalize(u + N(0, noise^2 / dim)) around a unit latent u; outliers
/// get independent random unit descriptors. Both images are shuffled.
SynthPair generate_pair(std::mt19937_64& rng, const PairSpec& spec);

/// Deterministic per-pair stream: seed_seq{seed, index}.
std::mt19937_64 pair_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace glow

#endif  // GLOW_SYNTH_SYNTHGEN_HPP_

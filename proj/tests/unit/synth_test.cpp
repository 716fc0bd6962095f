// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "glow/synth/synthgen.hpp"

namespace glow {
namespace {

// Mutual nearest neighbours by descriptor dot product.
std::set<std::pair<std::size_t, std::size_t>> mutual_nn(const FeatureSet& a, const FeatureSet& b) {
  const std::size_t m = a.size(), n = b.size(), d = a.descriptor_dim();
  std::vector<std::size_t> best_a(m), best_b(n);
  std::vector<double> score_a(m, -1e300), score_b(n, -1e300);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += double(a.descriptors(i, k)) * b.descriptors(j, k);
      if (s > score_a[i]) score_a[i] = s, best_a[i] = j;
      if (s > score_b[j]) score_b[j] = s, best_b[j] = i;
    }
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < m; ++i)
    if (best_b[best_a[i]] == i) out.emplace(i, best_a[i]);
  return out;
}

class SynthPresets : public ::testing::TestWithParam<std::tuple<Preset, int>> {};

TEST_P(SynthPresets, ConstructionMatchesGeometricLabels) {
  const auto [preset, seed] = GetParam();
  auto rng = pair_rng(seed, 0);
  const PairSpec spec = preset_spec(preset, 256);
  const SynthPair p = generate_pair(rng, spec);
  EXPECT_EQ(p.inliers, std::size_t(std::ceil(spec.inlier_ratio * 256 - 1e-9)));
  EXPECT_EQ(p.gt.inliers.size(), p.inliers);
  EXPECT_EQ(p.gt.unmatched_a.size(), 256 - p.inliers);
  EXPECT_EQ(label_pairs(p.a.points, p.b.points, p.gt.h), p.gt);
  EXPECT_NO_THROW(p.a.validate());
  EXPECT_NO_THROW(p.b.validate());
  for (const FeatureSet* fs : {&p.a, &p.b})
    for (std::size_t i = 0; i < fs->size(); ++i) {
      EXPECT_GE(fs->points(i, 0), 0);
      EXPECT_LE(fs->points(i, 0), 640);
      EXPECT_GE(fs->points(i, 1), 0);
      EXPECT_LE(fs->points(i, 1), 480);
      double norm = 0;
      for (std::size_t k = 0; k < fs->descriptor_dim(); ++k) norm += double(fs->descriptors(i, k)) * fs->descriptors(i, k);
      EXPECT_NEAR(norm, 1.0, 1e-5);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SynthPresets,
                         ::testing::Combine(::testing::Values(Preset::kEasy, Preset::kMedium, Preset::kHard),
                                            ::testing::Range(0, 8)));

TEST(Synth, SameSeedSamePair) {
  auto r1 = pair_rng(42, 7), r2 = pair_rng(42, 7), r3 = pair_rng(42, 8);
  const PairSpec spec = preset_spec(Preset::kMedium, 128);
  const SynthPair a = generate_pair(r1, spec), b = generate_pair(r2, spec), c = generate_pair(r3, spec);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.gt, b.gt);
  EXPECT_NE(a.a, c.a);
}

TEST(Synth, NoiselessDescriptorsRecoverEveryInlier) {
  auto rng = pair_rng(3, 0);
  PairSpec spec = preset_spec(Preset::kEasy, 200);
  spec.inlier_ratio = 1.0;
  spec.noise = 0.0;
  const SynthPair p = generate_pair(rng, spec);
  const auto nn = mutual_nn(p.a, p.b);
  const std::set<std::pair<std::size_t, std::size_t>> truth(p.gt.inliers.begin(), p.gt.inliers.end());
  EXPECT_EQ(nn, truth);
}

TEST(Synth, NoiseLowersNearestNeighbourAccuracy) {
  double correct[2] = {0, 0};
  const double levels[2] = {0.1, 0.8};
  for (int l = 0; l < 2; ++l) {
    auto rng = pair_rng(5, 0);
    PairSpec spec = preset_spec(Preset::kMedium, 256);
    spec.noise = levels[l];
    const SynthPair p = generate_pair(rng, spec);
    const std::set<std::pair<std::size_t, std::size_t>> truth(p.gt.inliers.begin(), p.gt.inliers.end());
    for (const auto& m : mutual_nn(p.a, p.b)) correct[l] += truth.count(m);
  }
  EXPECT_GT(correct[0], correct[1]);
}

TEST(Synth, ZeroDifficultyIsIdentity) {
  std::mt19937_64 rng(1);
  const HomographySample s = sample_homography(rng, Difficulty{0, 0, 0});
  EXPECT_LT((s.h - Homography::Identity()).norm(), 1e-9);
}

TEST(Synth, SampledHomographyMapsSourceToTarget) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const HomographySample s = sample_homography(rng, Difficulty{1.0, 45, 1.0});
    EXPECT_TRUE(is_convex(s.target));
    for (int i = 0; i < 4; ++i) {
      const auto q = apply_h(s.h, s.source[i]);
      ASSERT_TRUE(q);
      EXPECT_LT((*q - s.target[i]).norm(), 1e-6);
    }
  }
}

TEST(Synth, ConvexityRejectionRateBelowHalf) {
  std::mt19937_64 rng(3);
  std::size_t rejected = 0, attempts = 0;
  for (int k = 0; k < 10000; ++k) {
    const HomographySample s = sample_homography(rng, Difficulty{1.0, 45, 1.0});
    rejected += s.convexity_rejections;
    attempts += s.convexity_rejections + s.bounds_rejections + 1;
  }
  EXPECT_LT(double(rejected) / double(attempts), 0.5);
}

TEST(Synth, IsConvex) {
  const std::array<Point2, 4> square = {Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)};
  const std::array<Point2, 4> dart = {Point2(0, 0), Point2(2, 0), Point2(0.5, 0.5), Point2(0, 2)};
  const std::array<Point2, 4> bowtie = {Point2(0, 0), Point2(1, 1), Point2(1, 0), Point2(0, 1)};
  EXPECT_TRUE(is_convex(square));
  EXPECT_FALSE(is_convex(dart));
  EXPECT_FALSE(is_convex(bowtie));
}

TEST(Synth, RejectsBadSpecs) {
  std::mt19937_64 rng(1);
  PairSpec spec;
  spec.inlier_ratio = 0;
  EXPECT_THROW(generate_pair(rng, spec), InvalidInput);
  spec = PairSpec{};
  spec.difficulty.rotation_deg = 90;
  EXPECT_THROW(generate_pair(rng, spec), InvalidInput);
  EXPECT_THROW(parse_preset("extreme"), InvalidInput);
  EXPECT_EQ(parse_preset(preset_name(Preset::kHard)), Preset::kHard);
}

}  // namespace
}  // namespace glow

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TRAIN_LABELS_HPP_
#define GLOW_TRAIN_LABELS_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "glow/geometry/homography.hpp"
#include "glow/num/matrix.hpp"

namespace glow {

inline constexpr double kInlierRadius = 3.0;
inline constexpr double kOutlierRadius = 5.0;

struct GroundTruth {
  Homography h = Homography::Identity();                // maps A to B, h(2, 2) == 1
  std::vector<std::pair<std::size_t, std::size_t>> inliers;  // sorted by first
  std::vector<std::size_t> unmatched_a;                  // sorted
  std::vector<std::size_t> unmatched_b;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Inliers are mutually closest pairs (by symmetric error, lowest index on
/// ties) with error below r_in. A point is unmatchable when its smallest
/// error to any counterpart exceeds r_out. Throws InvalidInput on singular h.
GroundTruth label_pairs(const Matrix<float>& points_a, const Matrix<float>& points_b, const Homography& h,
                        double r_in = kInlierRadius, double r_out = kOutlierRadius);

/// Symmetric error of every (i, j), M x N.
Matrix<double> pairwise_errors(const Matrix<float>& points_a, const Matrix<float>& points_b, const Homography& h);

// Text layout: first line "H" and 9 row-major values; then "inliers K" and K
// lines "i j"; then "unmatched_a K" and one index per line; same for B.
std::string format_ground_truth(const GroundTruth& gt);
GroundTruth parse_ground_truth(const std::string& text);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

}  // namespace glow

#endif  // GLOW_TRAIN_LABELS_HPP_

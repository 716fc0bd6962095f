// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_GEOMETRY_HOMOGRAPHY_HPP_
#define GLOW_GEOMETRY_HOMOGRAPHY_HPP_

#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "glow/num/matrix.hpp"

namespace glow {

using Homography = Eigen::Matrix3d;
using Point2 = Eigen::Vector2d;

struct PointPair {
  Point2 a;
  Point2 b;
};

/// Raised by dlt() when the correspondences do not determine a homography.
class DegenerateConfiguration : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Scales h so that h(2, 2) == 1 when that entry is not ~0, else to unit
/// Frobenius norm.
Homography normalize_h(const Homography& h);

/// Projective action; nullopt when the point maps to the plane at infinity.
std::optional<Point2> apply_h(const Homography& h, const Point2& p);

/// Maps every point. Points with |w| <= 1e-12 are dropped (with a warning)
/// and their input indices appended to `excluded`.
std::vector<Point2> apply_h(const Homography& h, std::span<const Point2> points,
                            std::vector<std::size_t>* excluded = nullptr);

/// Throws InvalidInput if h is singular or badly conditioned.
Homography checked_inverse(const Homography& h);

/// Mean of the forward error |h a - b| and backward error |h^-1 b - a|.
/// Infinite when either side maps to infinity.
double symmetric_error(const Homography& h, const Homography& h_inv, const Point2& a, const Point2& b);

/// Normalized direct linear transform, minimizing sum_i w_i |A_i vec(h)|^2.
/// Empty `weights` means unit weights. Throws DegenerateConfiguration.
Homography dlt(std::span<const PointPair> pairs, std::span<const double> weights = {});

/// Residual sum_i w_i |A_i vec(h)|^2 of the (unnormalized) design matrix for
/// h scaled to unit Frobenius norm.
double algebraic_residual(const Homography& h, std::span<const PointPair> pairs,
                          std::span<const double> weights = {});

struct RansacResult {
  bool success = false;
  Homography h = Homography::Identity();  // refit on the inliers of the best hypothesis
  Homography hypothesis = Homography::Identity();
  std::vector<bool> inliers;               // of the best hypothesis
  std::size_t inlier_count = 0;
};

/// Plain RANSAC over 4-point samples scored by inlier count (symmetric error
/// below `threshold`). The first hypothesis with the highest count wins.
/// Fails (success = false) if no hypothesis reaches 4 inliers.
RansacResult ransac_h(std::span<const PointPair> pairs, double threshold, std::size_t iterations,
                      std::mt19937_64& rng);

/// Inlier mask of h: symmetric error below threshold.
std::vector<bool> inlier_mask(const Homography& h, std::span<const PointPair> pairs, double threshold);

}  // namespace glow

#endif  // GLOW_GEOMETRY_HOMOGRAPHY_HPP_

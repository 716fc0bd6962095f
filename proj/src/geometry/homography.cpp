// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/geometry/homography.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <spdlog/spdlog.h>

namespace glow {
namespace {

constexpr double kInfinityW = 1e-12;

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d hartley(std::span<const Point2> pts, std::span<const double> w) {
  Point2 c = Point2::Zero();
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c += w[i] * pts[i];
    total += w[i];
  }
  c /= total;
  double mean = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) mean += w[i] * (pts[i] - c).norm();
  mean /= total;
  const double s = mean > 0 ? std::sqrt(2.0) / mean : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

void design_rows(const Point2& a, const Point2& b, double sw, Eigen::Ref<Eigen::Matrix<double, 2, 9>> rows) {
  const double x = a.x(), y = a.y(), u = b.x(), v = b.y();
  rows.row(0) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
  rows.row(1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  rows *= sw;
}

bool collinear(const Point2& p, const Point2& q, const Point2& r) {
  const Point2 u = q - p, v = r - p;
  const double cross = u.x() * v.y() - u.y() * v.x();
  return std::abs(cross) <= 1e-9 * std::max(1.0, u.norm() * v.norm());
}

bool any_three_collinear(const Point2* p) {
  return collinear(p[0], p[1], p[2]) || collinear(p[0], p[1], p[3]) || collinear(p[0], p[2], p[3]) ||
         collinear(p[1], p[2], p[3]);
}

}  // namespace

Homography normalize_h(const Homography& h) {
  if (std::abs(h(2, 2)) > 1e-12 * h.norm()) return h / h(2, 2);
  return h / h.norm();
}

std::optional<Point2> apply_h(const Homography& h, const Point2& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  if (!(std::abs(q.z()) > kInfinityW)) return std::nullopt;
  return Point2(q.x() / q.z(), q.y() / q.z());
}

std::vector<Point2> apply_h(const Homography& h, std::span<const Point2> points, std::vector<std::size_t>* excluded) {
  std::vector<Point2> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (auto q = apply_h(h, points[i])) {
      out.push_back(*q);
    } else {
      spdlog::warn("apply_h: point {} maps to infinity and is excluded", i);
      if (excluded) excluded->push_back(i);
    }
  }
  return out;
}

Homography checked_inverse(const Homography& h) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h);
  const auto s = svd.singularValues();
  if (!(s(2) > 1e-12 * s(0))) throw InvalidInput("homography is singular");
  return normalize_h(h.inverse());
}

double symmetric_error(const Homography& h, const Homography& h_inv, const Point2& a, const Point2& b) {
  const auto fb = apply_h(h, a);
  const auto ba = apply_h(h_inv, b);
  if (!fb || !ba) return std::numeric_limits<double>::infinity();
  return 0.5 * ((*fb - b).norm() + (*ba - a).norm());
}

Homography dlt(std::span<const PointPair> pairs, std::span<const double> weights) {
  const std::size_t n = pairs.size();
  std::vector<double> w(n, 1.0);
  if (!weights.empty()) {
    require(weights.size() == n, "dlt: one weight per correspondence required");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InvalidInput("dlt: weights must be finite and >= 0");
      w[i] = weights[i];
    }
  }
  std::size_t support = 0;
  for (double v : w) support += v > 0 ? 1 : 0;
  if (support < 4) throw DegenerateConfiguration("dlt: need at least 4 weighted correspondences");

  std::vector<Point2> pa(n), pb(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = pairs[i].a;
    pb[i] = pairs[i].b;
  }
  const Eigen::Matrix3d ta = hartley(pa, w), tb = hartley(pb, w);
  // Zero rows pad the system to at least 9 equations for the full SVD.
  Eigen::Matrix<double, Eigen::Dynamic, 9> design =
      Eigen::Matrix<double, Eigen::Dynamic, 9>::Zero(Eigen::Index(std::max<std::size_t>(2 * n, 9)), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = (ta * pa[i].homogeneous()).hnormalized();
    const Point2 b = (tb * pb[i].homogeneous()).hnormalized();
    design_rows(a, b, std::sqrt(w[i]), design.block<2, 9>(2 * i, 0));
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(design, Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  if (!(s(7) > 1e-9 * s(0))) throw DegenerateConfiguration("dlt: rank-deficient design matrix");
  const Eigen::Matrix<double, 9, 1> v = svd.matrixV().col(8);
  Homography hn;
  hn << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  const Homography h = tb.inverse() * hn * ta;
  Eigen::JacobiSVD<Eigen::Matrix3d> hs(h);
  if (!(hs.singularValues()(2) > 1e-10 * hs.singularValues()(0)))
    throw DegenerateConfiguration("dlt: solution is singular");
  return normalize_h(h);
}

double algebraic_residual(const Homography& h, std::span<const PointPair> pairs, std::span<const double> weights) {
  const Homography hn = h / h.norm();
  Eigen::Matrix<double, 9, 1> v;
  v << hn(0, 0), hn(0, 1), hn(0, 2), hn(1, 0), hn(1, 1), hn(1, 2), hn(2, 0), hn(2, 1), hn(2, 2);
  double total = 0;
  Eigen::Matrix<double, 2, 9> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    design_rows(pairs[i].a, pairs[i].b, 1.0, rows);
    total += w * (rows * v).squaredNorm();
  }
  return total;
}

std::vector<bool> inlier_mask(const Homography& h, std::span<const PointPair> pairs, double threshold) {
  std::vector<bool> mask(pairs.size(), false);
  Homography inv;
  try {
    inv = checked_inverse(h);
  } catch (const InvalidInput&) {
    return mask;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i)
    mask[i] = symmetric_error(h, inv, pairs[i].a, pairs[i].b) < threshold;
  return mask;
}

RansacResult ransac_h(std::span<const PointPair> pairs, double threshold, std::size_t iterations,
                      std::mt19937_64& rng) {
  RansacResult best;
  const std::size_t n = pairs.size();
  best.inliers.assign(n, false);
  if (n < 4) return best;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::size_t idx[4];
    for (std::size_t k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = pick(rng);
        fresh = true;
        for (std::size_t j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
      } while (!fresh);
    }
    PointPair sample[4];
    Point2 sa[4], sb[4];
    for (std::size_t k = 0; k < 4; ++k) {
      sample[k] = pairs[idx[k]];
      sa[k] = sample[k].a;
      sb[k] = sample[k].b;
    }
    if (any_three_collinear(sa) || any_three_collinear(sb)) continue;
    Homography h;
    try {
      h = dlt(sample);
    } catch (const InvalidInput&) {
      continue;
    }
    std::vector<bool> mask = inlier_mask(h, pairs, threshold);
    const std::size_t count = std::size_t(std::count(mask.begin(), mask.end(), true));
    if (count > best.inlier_count) {
      best.inlier_count = count;
      best.inliers = std::move(mask);
      best.hypothesis = h;
    }
  }
  if (best.inlier_count < 4) {
    best.inlier_count = 0;
    best.inliers.assign(n, false);
    return best;
  }
  best.success = true;
  std::vector<PointPair> support;
  for (std::size_t i = 0; i < n; ++i)
    if (best.inliers[i]) support.push_back(pairs[i]);
  try {
    best.h = dlt(support);
  } catch (const InvalidInput&) {
    best.h = best.hypothesis;
  }
  return best;
}

}  // namespace glow

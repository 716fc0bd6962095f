// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/train/labels.hpp"

#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "glow/io/binary.hpp"

namespace glow {

Matrix<double> pairwise_errors(const Matrix<float>& points_a, const Matrix<float>& points_b, const Homography& h) {
  const Homography inv = checked_inverse(h);
  const std::size_t m = points_a.rows(), n = points_b.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::optional<Point2>> fwd(m), bwd(n);
  for (std::size_t i = 0; i < m; ++i) fwd[i] = apply_h(h, Point2(points_a(i, 0), points_a(i, 1)));
  for (std::size_t j = 0; j < n; ++j) bwd[j] = apply_h(inv, Point2(points_b(j, 0), points_b(j, 1)));
  Matrix<double> e(m, n, kInf);
  for (std::size_t i = 0; i < m; ++i) {
    if (!fwd[i]) continue;
    const Point2 a(points_a(i, 0), points_a(i, 1));
    for (std::size_t j = 0; j < n; ++j) {
      if (!bwd[j]) continue;
      const Point2 b(points_b(j, 0), points_b(j, 1));
      e(i, j) = 0.5 * ((*fwd[i] - b).norm() + (*bwd[j] - a).norm());
    }
  }
  return e;
}

GroundTruth label_pairs(const Matrix<float>& points_a, const Matrix<float>& points_b, const Homography& h,
                        double r_in, double r_out) {
  GroundTruth gt;
  gt.h = normalize_h(h);
  const Matrix<double> e = pairwise_errors(points_a, points_b, gt.h);
  const std::size_t m = e.rows(), n = e.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> nearest_a(m, n), nearest_b(n, m);
  std::vector<double> best_a(m, kInf), best_b(n, kInf);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (e(i, j) < best_a[i]) {
        best_a[i] = e(i, j);
        nearest_a[i] = j;
      }
      if (e(i, j) < best_b[j]) {
        best_b[j] = e(i, j);
        nearest_b[j] = i;
      }
    }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = nearest_a[i];
    if (j < n && nearest_b[j] == i && e(i, j) < r_in) gt.inliers.emplace_back(i, j);
    if (best_a[i] > r_out) gt.unmatched_a.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j)
    if (best_b[j] > r_out) gt.unmatched_b.push_back(j);
  return gt;
}

std::string format_ground_truth(const GroundTruth& gt) {
  std::string out = "H";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out += fmt::format(" {:.17g}", gt.h(r, c));
  out += fmt::format("\ninliers {}\n", gt.inliers.size());
  for (const auto& [i, j] : gt.inliers) out += fmt::format("{} {}\n", i, j);
  out += fmt::format("unmatched_a {}\n", gt.unmatched_a.size());
  for (std::size_t i : gt.unmatched_a) out += fmt::format("{}\n", i);
  out += fmt::format("unmatched_b {}\n", gt.unmatched_b.size());
  for (std::size_t j : gt.unmatched_b) out += fmt::format("{}\n", j);
  return out;
}

GroundTruth parse_ground_truth(const std::string& text) {
  std::istringstream in(text);
  GroundTruth gt;
  std::string tag;
  auto expect = [&](const char* want) {
    if (!(in >> tag) || tag != want) throw InvalidInput(std::string("ground truth: expected '") + want + "'");
  };
  auto count = [&]() {
    long long k = -1;
    if (!(in >> k) || k < 0) throw InvalidInput("ground truth: bad count");
    return std::size_t(k);
  };
  expect("H");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(in >> gt.h(r, c))) throw InvalidInput("ground truth: bad homography");
  expect("inliers");
  gt.inliers.resize(count());
  for (auto& [i, j] : gt.inliers)
    if (!(in >> i >> j)) throw InvalidInput("ground truth: bad inlier pair");
  expect("unmatched_a");
  gt.unmatched_a.resize(count());
  for (auto& i : gt.unmatched_a)
    if (!(in >> i)) throw InvalidInput("ground truth: bad index");
  expect("unmatched_b");
  gt.unmatched_b.resize(count());
  for (auto& j : gt.unmatched_b)
    if (!(in >> j)) throw InvalidInput("ground truth: bad index");
  if (in >> tag) throw InvalidInput("ground truth: trailing content");
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  write_text_atomic(path, format_ground_truth(gt));
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_ground_truth(std::string(bytes.begin(), bytes.end()));
}

}  // namespace glow

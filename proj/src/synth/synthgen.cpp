// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/synth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

namespace glow {
namespace {

constexpr std::size_t kMaxHomographyAttempts = 10000;
constexpr double kJitterRadius = 0.5;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Coordinates go through float so every check sees exactly what gets stored.
Point2 quantize(const Point2& p) { return Point2(double(float(p.x())), double(float(p.y()))); }

Point2 jitter(std::mt19937_64& rng, const Point2& p, ImageSize frame) {
  const double r = kJitterRadius * std::sqrt(uniform(rng, 0, 1));
  const double t = uniform(rng, 0, 2 * std::numbers::pi);
  const Point2 q = p + Point2(r * std::cos(t), r * std::sin(t));
  return quantize(Point2(std::clamp(q.x(), 0.0, double(frame.width)), std::clamp(q.y(), 0.0, double(frame.height))));
}

bool in_frame(const Point2& p, ImageSize frame) {
  return p.x() >= 0 && p.x() <= frame.width && p.y() >= 0 && p.y() <= frame.height;
}

Point2 uniform_point(std::mt19937_64& rng, ImageSize frame) {
  return Point2(uniform(rng, 0, frame.width), uniform(rng, 0, frame.height));
}

std::vector<float> unit_vector(std::mt19937_64& rng, std::size_t dim, const std::vector<double>* center, double sigma) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (std::size_t k = 0; k < dim; ++k) v[k] = (center ? (*center)[k] : 0.0) + sigma * normal(rng);
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (norm == 0) {  // measure zero; fall back to the first axis
    v[0] = 1;
    norm = 1;
  }
  std::vector<float> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k] = float(v[k] / norm);
  return out;
}

// Points of one image plus the index checks both sides share.
struct Placement {
  const Homography& h;
  const Homography& inv;
  std::vector<Point2> a, b;

  double min_error_a(const Point2& p) const {  // p in A against all of B
    double best = std::numeric_limits<double>::infinity();
    for (const Point2& q : b) best = std::min(best, symmetric_error(h, inv, p, q));
    return best;
  }
  double min_error_b(const Point2& q) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Point2& p : a) best = std::min(best, symmetric_error(h, inv, p, q));
    return best;
  }
};

void check(bool ok, const char* message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace

void Difficulty::validate() const {
  check(perspective >= 0 && perspective <= 1, "difficulty: perspective must be in [0, 1]");
  check(rotation_deg >= 0 && rotation_deg <= 45, "difficulty: rotation must be in [0, 45] degrees");
  check(translation >= 0 && translation <= 1, "difficulty: translation must be in [0, 1]");
}

void PairSpec::validate() const {
  check(points >= 8, "pair spec: at least 8 points are required");
  check(inlier_ratio > 0 && inlier_ratio <= 1, "pair spec: inlier ratio must be in (0, 1]");
  check(noise >= 0 && std::isfinite(noise), "pair spec: noise must be non-negative");
  check(descriptor_dim > 0, "pair spec: descriptor dim must be positive");
  difficulty.validate();
}

bool is_convex(const std::array<Point2, 4>& quad) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const Point2 e1 = quad[(i + 1) % 4] - quad[i];
    const Point2 e2 = quad[(i + 2) % 4] - quad[(i + 1) % 4];
    const double cross = e1.x() * e2.y() - e1.y() * e2.x();
    if (cross == 0) return false;
    const int s = cross > 0 ? 1 : -1;
    if (sign != 0 && s != sign) return false;
    sign = s;
  }
  return true;
}

HomographySample sample_homography(std::mt19937_64& rng, const Difficulty& difficulty, ImageSize frame) {
  difficulty.validate();
  const double w = frame.width, h = frame.height;
  HomographySample out;
  out.source = {Point2(0, 0), Point2(w, 0), Point2(w, h), Point2(0, h)};
  const Point2 inward[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const double max_angle = difficulty.rotation_deg * std::numbers::pi / 180.0;
  for (std::size_t attempt = 0; attempt < kMaxHomographyAttempts; ++attempt) {
    std::array<Point2, 4> quad;
    for (int i = 0; i < 4; ++i) {
      const double dx = uniform(rng, 0, 1), dy = uniform(rng, 0, 1);
      quad[i] = out.source[i] + Point2(inward[i].x() * dx * difficulty.perspective * w / 2,
                                       inward[i].y() * dy * difficulty.perspective * h / 2);
    }
    const double angle = max_angle > 0 ? uniform(rng, -max_angle, max_angle) : 0.0;
    const Point2 centroid = (quad[0] + quad[1] + quad[2] + quad[3]) / 4.0;
    const Eigen::Rotation2Dd rotation(angle);
    for (Point2& p : quad) p = rotation * (p - centroid) + centroid;
    if (!is_convex(quad)) {
      ++out.convexity_rejections;
      continue;
    }
    Point2 lo(-quad[0].x(), -quad[0].y()), hi(w - quad[0].x(), h - quad[0].y());
    for (const Point2& p : quad) {
      lo = lo.cwiseMax(-p);
      hi = hi.cwiseMin(Point2(w, h) - p);
    }
    if (lo.x() > hi.x() || lo.y() > hi.y()) {
      ++out.bounds_rejections;
      continue;
    }
    const Point2 mid = (lo + hi) / 2.0;
    const Point2 draw(uniform(rng, lo.x(), std::nextafter(hi.x(), INFINITY)),
                      uniform(rng, lo.y(), std::nextafter(hi.y(), INFINITY)));
    const Point2 shift = mid + difficulty.translation * (draw - mid);
    for (Point2& p : quad) p += shift;
    out.target = quad;
    std::vector<PointPair> corners;
    for (int i = 0; i < 4; ++i) corners.push_back({out.source[i], out.target[i]});
    out.h = dlt(corners);
    if (uniform(rng, 0, 1) < 0.5) {
      out.h = normalize_h(checked_inverse(out.h));
      std::swap(out.source, out.target);
    }
    return out;
  }
  throw GenerationError("sample_homography: too many rejected quads");
}

PairSpec preset_spec(Preset preset, std::size_t points, std::size_t descriptor_dim) {
  PairSpec spec;
  spec.points = points;
  spec.descriptor_dim = descriptor_dim;
  switch (preset) {
    case Preset::kEasy:
      spec.inlier_ratio = 0.95;
      spec.noise = 0.1;
      break;
    case Preset::kMedium:
      spec.inlier_ratio = 0.6;
      spec.noise = 0.3;
      break;
    case Preset::kHard:
      spec.inlier_ratio = 0.3;
      spec.noise = 0.5;
      break;
  }
  return spec;
}

Preset parse_preset(const std::string& name) {
  if (name == "easy") return Preset::kEasy;
  if (name == "medium") return Preset::kMedium;
  if (name == "hard") return Preset::kHard;
  throw InvalidInput("unknown preset '" + name + "' (expected easy, medium or hard)");
}

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::kEasy:
      return "easy";
    case Preset::kMedium:
      return "medium";
    case Preset::kHard:
      return "hard";
  }
  return "medium";
}

std::mt19937_64 pair_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
  return std::mt19937_64(seq);
}

SynthPair generate_pair(std::mt19937_64& rng, const PairSpec& spec) {
  spec.validate();
  const ImageSize frame = kSynthFrame;
  const std::size_t n = spec.points;
  const auto inliers = std::size_t(std::ceil(spec.inlier_ratio * double(n) - 1e-9));

  const HomographySample sample = sample_homography(rng, spec.difficulty, frame);
  const Homography h = normalize_h(sample.h);
  const Homography inv = checked_inverse(h);
  Placement place{h, inv, {}, {}};

  const std::size_t budget = 200 * n + 10000;
  std::size_t attempts = 0;
  while (place.a.size() < inliers) {
    if (++attempts > budget) throw GenerationError("generate_pair: could not place inlier points");
    const Point2 latent = uniform_point(rng, frame);
    const auto mapped = apply_h(h, latent);
    if (!mapped || !in_frame(*mapped, frame)) continue;
    const Point2 pa = jitter(rng, latent, frame), pb = jitter(rng, *mapped, frame);
    if (!(symmetric_error(h, inv, pa, pb) < kInlierRadius)) continue;
    if (!(place.min_error_a(pa) > kOutlierRadius) || !(place.min_error_b(pb) > kOutlierRadius)) continue;
    place.a.push_back(pa);
    place.b.push_back(pb);
  }
  // Outliers of A are checked against every B point, including the B
  // outliers placed afterwards (which are checked against all of A).
  while (place.a.size() < n) {
    if (++attempts > budget) throw GenerationError("generate_pair: could not place outlier points");
    const Point2 p = quantize(uniform_point(rng, frame));
    if (place.min_error_a(p) > kOutlierRadius) place.a.push_back(p);
  }
  while (place.b.size() < n) {
    if (++attempts > budget) throw GenerationError("generate_pair: could not place outlier points");
    const Point2 q = quantize(uniform_point(rng, frame));
    if (place.min_error_b(q) > kOutlierRadius) place.b.push_back(q);
  }

  const std::size_t dim = spec.descriptor_dim;
  const double sigma = spec.noise / std::sqrt(double(dim));
  std::vector<std::vector<float>> desc_a(n), desc_b(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < inliers; ++i) {
    const std::vector<float> u = unit_vector(rng, dim, nullptr, 1.0);
    const std::vector<double> center(u.begin(), u.end());
    desc_a[i] = unit_vector(rng, dim, &center, sigma);
    desc_b[i] = unit_vector(rng, dim, &center, sigma);
  }
  for (std::size_t i = inliers; i < n; ++i) desc_a[i] = unit_vector(rng, dim, nullptr, 1.0);
  for (std::size_t i = inliers; i < n; ++i) desc_b[i] = unit_vector(rng, dim, nullptr, 1.0);

  // perm[k] is the construction index stored at row k.
  std::vector<std::size_t> perm_a(n), perm_b(n);
  std::iota(perm_a.begin(), perm_a.end(), 0);
  std::iota(perm_b.begin(), perm_b.end(), 0);
  std::shuffle(perm_a.begin(), perm_a.end(), rng);
  std::shuffle(perm_b.begin(), perm_b.end(), rng);
  std::vector<std::size_t> row_a(n), row_b(n);
  for (std::size_t k = 0; k < n; ++k) {
    row_a[perm_a[k]] = k;
    row_b[perm_b[k]] = k;
  }

  auto build = [&](const std::vector<Point2>& pts, const std::vector<std::vector<float>>& desc,
                   const std::vector<std::size_t>& perm) {
    FeatureSet fs;
    fs.image_size = frame;
    fs.points = Matrix<float>(n, 2);
    fs.descriptors = Matrix<float>(n, dim);
    for (std::size_t k = 0; k < n; ++k) {
      fs.points(k, 0) = float(pts[perm[k]].x());
      fs.points(k, 1) = float(pts[perm[k]].y());
      for (std::size_t c = 0; c < dim; ++c) fs.descriptors(k, c) = desc[perm[k]][c];
    }
    return fs;
  };

  SynthPair out;
  out.spec = spec;
  out.inliers = inliers;
  out.a = build(place.a, desc_a, perm_a);
  out.b = build(place.b, desc_b, perm_b);
  out.gt.h = h;
  for (std::size_t i = 0; i < inliers; ++i) out.gt.inliers.emplace_back(row_a[i], row_b[i]);
  for (std::size_t i = inliers; i < n; ++i) {
    out.gt.unmatched_a.push_back(row_a[i]);
    out.gt.unmatched_b.push_back(row_b[i]);
  }
  std::sort(out.gt.inliers.begin(), out.gt.inliers.end());
  std::sort(out.gt.unmatched_a.begin(), out.gt.unmatched_a.end());
  std::sort(out.gt.unmatched_b.begin(), out.gt.unmatched_b.end());

  if (label_pairs(out.a.points, out.b.points, h) != out.gt)
    throw GenerationError("generate_pair: construction labels disagree with geometric labels");
  return out;
}

}  // namespace glow

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/geometry/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace glow {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void finalize(PrecisionRecall& pr) {
  pr.precision_undefined = pr.predicted == 0;
  pr.precision = pr.predicted == 0 ? 0.0 : double(pr.correct) / double(pr.predicted);
  pr.recall = pr.ground_truth == 0 ? 0.0 : double(pr.recovered) / double(pr.ground_truth);
}

}  // namespace

double mean_corner_error(const Homography& estimate, const Homography& truth, ImageSize frame) {
  const double w = frame.width, h = frame.height;
  const Point2 corners[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  double total = 0;
  for (const Point2& c : corners) {
    const auto p = apply_h(estimate, c);
    const auto q = apply_h(truth, c);
    if (!p || !q) return kInf;
    total += (*p - *q).norm();
  }
  const double e = total / 4.0;
  return std::isfinite(e) ? e : kInf;
}

double corner_auc(std::span<const double> errors, double threshold) {
  require(threshold > 0, "corner_auc: threshold must be positive");
  if (errors.empty()) return 0.0;
  double area = 0;
  for (double e : errors) area += std::max(0.0, threshold - e);
  return area / (double(errors.size()) * threshold);
}

PrecisionRecall match_pr(std::span<const Match> matches, const Matrix<float>& points_a,
                         const Matrix<float>& points_b, const GroundTruth& gt, double radius) {
  PrecisionRecall pr;
  const Homography inv = checked_inverse(gt.h);
  const std::set<std::pair<std::size_t, std::size_t>> truth(gt.inliers.begin(), gt.inliers.end());
  pr.predicted = matches.size();
  pr.ground_truth = gt.inliers.size();
  for (const Match& m : matches) {
    require(m.a < points_a.rows() && m.b < points_b.rows(), "match_pr: match index out of range");
    const Point2 a(points_a(m.a, 0), points_a(m.a, 1)), b(points_b(m.b, 0), points_b(m.b, 1));
    if (symmetric_error(gt.h, inv, a, b) < radius) ++pr.correct;
    if (truth.count({m.a, m.b})) ++pr.recovered;
  }
  finalize(pr);
  return pr;
}

void accumulate(PrecisionRecall& a, const PrecisionRecall& b) {
  a.predicted += b.predicted;
  a.correct += b.correct;
  a.ground_truth += b.ground_truth;
  a.recovered += b.recovered;
  finalize(a);
}

PairEval evaluate_pair(const MatchResult& matches, const FeatureSet& a, const FeatureSet& b, const GroundTruth& gt,
                       const EvalOptions& options, std::uint64_t pair_index) {
  PairEval out;
  out.pr = match_pr(matches.pairs, a.points, b.points, gt);
  std::vector<PointPair> pairs;
  std::vector<double> weights;
  for (const Match& m : matches.pairs) {
    pairs.push_back({Point2(a.points(m.a, 0), a.points(m.a, 1)), Point2(b.points(m.b, 0), b.points(m.b, 1))});
    weights.push_back(m.score);
  }
  std::seed_seq seq{options.seed, pair_index};
  std::mt19937_64 rng(seq);
  const RansacResult ransac = ransac_h(pairs, options.ransac_threshold, options.ransac_iterations, rng);
  out.ransac_error = ransac.success ? mean_corner_error(ransac.h, gt.h, a.image_size) : kInf;
  try {
    out.dlt_error = mean_corner_error(dlt(pairs, weights), gt.h, a.image_size);
  } catch (const InvalidInput&) {
    out.dlt_error = kInf;
  }
  return out;
}

EvalReport EvalReport::summarize(std::vector<PairEval> pairs) {
  EvalReport r;
  std::vector<double> ransac, direct;
  for (const PairEval& p : pairs) {
    accumulate(r.pr, p.pr);
    ransac.push_back(p.ransac_error);
    direct.push_back(p.dlt_error);
  }
  r.auc_ransac_1 = corner_auc(ransac, 1.0);
  r.auc_ransac_5 = corner_auc(ransac, 5.0);
  r.auc_dlt_1 = corner_auc(direct, 1.0);
  r.auc_dlt_5 = corner_auc(direct, 5.0);
  r.pairs = std::move(pairs);
  return r;
}

std::string EvalReport::to_csv() const {
  std::string out = "pair,predicted,correct,ground_truth,recovered,precision,recall,ransac_corner_error,dlt_corner_error\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairEval& p = pairs[i];
    out += fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6g},{:.6g}\n", i, p.pr.predicted, p.pr.correct,
                       p.pr.ground_truth, p.pr.recovered, p.pr.precision, p.pr.recall, p.ransac_error, p.dlt_error);
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["pairs"] = pairs.size();
  j["precision"] = pr.precision;
  j["recall"] = pr.recall;
  j["predicted"] = pr.predicted;
  j["correct"] = pr.correct;
  j["ground_truth"] = pr.ground_truth;
  j["recovered"] = pr.recovered;
  j["auc_ransac"] = {{"1px", auc_ransac_1}, {"5px", auc_ransac_5}};
  j["auc_dlt"] = {{"1px", auc_dlt_1}, {"5px", auc_dlt_5}};
  return j.dump(2) + "\n";
}

}  // namespace glow

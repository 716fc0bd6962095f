// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_GEOMETRY_METRICS_HPP_
#define GLOW_GEOMETRY_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glow/features/feature_set.hpp"
#include "glow/geometry/homography.hpp"
#include "glow/model/head.hpp"
#include "glow/train/labels.hpp"

namespace glow {

/// Mean distance between the four frame corners mapped by `estimate` and by
/// `truth`. Infinite if a corner maps to infinity.
double mean_corner_error(const Homography& estimate, const Homography& truth, ImageSize frame);

/// Area under recall(e) = fraction of errors <= e for e in [0, threshold],
/// divided by threshold. Equals mean(max(0, threshold - e_i)) / threshold.
double corner_auc(std::span<const double> errors, double threshold);

struct PrecisionRecall {
  std::size_t predicted = 0;
  std::size_t correct = 0;       // symmetric error under the true h below the radius
  std::size_t ground_truth = 0;  // GT inlier pairs
  std::size_t recovered = 0;     // GT inlier pairs among the predictions
  double precision = 0;          // 0 when nothing was predicted (see precision_undefined)
  double recall = 0;
  bool precision_undefined = false;
};

PrecisionRecall match_pr(std::span<const Match> matches, const Matrix<float>& points_a,
                         const Matrix<float>& points_b, const GroundTruth& gt, double radius = kInlierRadius);

/// Adds the counts of `b` into `a` and recomputes the ratios (pooled).
void accumulate(PrecisionRecall& a, const PrecisionRecall& b);

struct EvalOptions {
  double ransac_threshold = 3.0;
  std::size_t ransac_iterations = 2000;
  std::uint64_t seed = 0;
};

struct PairEval {
  PrecisionRecall pr;
  double ransac_error = 0;  // mean corner error, infinite on failure
  double dlt_error = 0;
};

/// Precision/recall plus corner errors of RANSAC and of DLT weighted by
/// match scores. `pair_index` seeds the RANSAC stream for this pair.
PairEval evaluate_pair(const MatchResult& matches, const FeatureSet& a, const FeatureSet& b, const GroundTruth& gt,
                       const EvalOptions& options, std::uint64_t pair_index);

struct EvalReport {
  PrecisionRecall pr;  // pooled over pairs
  double auc_ransac_1 = 0, auc_ransac_5 = 0;
  double auc_dlt_1 = 0, auc_dlt_5 = 0;
  std::vector<PairEval> pairs;

  static EvalReport summarize(std::vector<PairEval> pairs);
  std::string to_csv() const;   // one line per pair
  std::string to_json() const;  // summary
};

}  // namespace glow

#endif  // GLOW_GEOMETRY_METRICS_HPP_

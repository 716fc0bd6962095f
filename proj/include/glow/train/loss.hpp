// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TRAIN_LOSS_HPP_
#define GLOW_TRAIN_LOSS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "glow/model/adaptive.hpp"
#include "glow/model/head.hpp"
#include "glow/train/labels.hpp"

namespace glow {

/// Ground truth in the row order of the model's states.
struct RowLabels {
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;

  bool empty() const { return matches.empty() && unmatched_a.empty() && unmatched_b.empty(); }
};

/// `index_a[r]` is the original point number held by row r.
RowLabels to_rows(const GroundTruth& gt, std::span<const std::size_t> index_a, std::span<const std::size_t> index_b);

/// Negative log-likelihood of one head:
///   -(mean_M log P + 1/2 mean_unmatchedA log(1 - sigma) + 1/2 mean_unmatchedB log(1 - sigma)).
/// Empty label sets contribute 0.
template <typename T>
Var<T> layer_loss(const Assignment<T>& head, const RowLabels& labels);

template <typename T>
struct AssignmentLoss {
  Var<T> total;                  // mean of the per-layer terms
  std::vector<double> per_layer;
};

/// nullopt when the pair has no labels at all.
template <typename T>
std::optional<AssignmentLoss<T>> assignment_loss(std::span<const Assignment<T>> heads, const RowLabels& labels);

/// Per-point decision from a head: the partner row, or kUnmatched.
struct Decisions {
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
};
template <typename T>
Decisions decisions(const Matrix<T>& log_p, double tau);

/// Binary labels of the classifier after layer `layer`: 1 where the
/// decision equals the final one, A rows first then B rows.
std::vector<double> agreement_labels(const Decisions& layer, const Decisions& last);

/// Mean binary cross-entropy of the confidence classifiers of layers
/// 1..L-1 on detached states against agreement with the last layer.
template <typename T>
Var<T> classifier_loss(const DeepPass<T>& pass, std::span<const Linear<Var<T>>> classifiers, double tau);

}  // namespace glow

#endif  // GLOW_TRAIN_LOSS_HPP_

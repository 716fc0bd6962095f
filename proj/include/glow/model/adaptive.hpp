// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_MODEL_ADAPTIVE_HPP_
#define GLOW_MODEL_ADAPTIVE_HPP_

#include <span>
#include <vector>

#include "glow/features/feature_set.hpp"
#include "glow/model/backbone.hpp"
#include "glow/model/head.hpp"
#include "glow/model/params.hpp"

namespace glow {

struct AdaptiveConfig {
  bool depth_enabled = true;   // early exit
  bool width_enabled = true;   // point pruning
  double alpha = 0.95;         // exit once this fraction of points is confident (strictly above)
  double beta = 0.01;          // prune confident points with matchability below this
  double tau = 0.1;            // match threshold on P
  bool retain_trace = false;
  bool two_matrix = false;     // unshared cross similarity, for cost comparison only

  /// Throws InvalidInput when a value is out of range.
  void validate() const;
};

/// What one executed layer saw and decided. Rows follow `index_a`/`index_b`
/// (original point numbers of the rows active during the layer).
template <typename T>
struct LayerRecord {
  std::vector<std::size_t> index_a, index_b;
  Matrix<T> states_a, states_b;        // after the layer
  Matrix<T> log_p;                     // head of this layer
  std::vector<T> sigma_a, sigma_b;
  std::vector<T> confidence_a, confidence_b;  // empty at the last layer
  std::vector<bool> pruned_a, pruned_b;       // rows removed after this layer
};

template <typename T>
struct LayerTrace {
  std::vector<LayerRecord<T>> layers;
};

/// 0.8 + 0.1 exp(-4 layer / layers), with 1-based `layer`.
double exit_threshold(std::size_t layer, std::size_t layers);

/// Per-point confidence sigmoid(w . x + b). Gradients do not reach x.
template <typename T>
Var<T> confidence(const Var<T>& states, const Linear<Var<T>>& classifier);

/// True if the fraction of confident points over all points exceeds alpha.
/// Points pruned earlier count as confident.
bool should_exit(std::span<const double> confidences, std::size_t pruned, double threshold, double alpha);

/// Rows to keep: a row goes when its confidence exceeds the threshold and
/// its matchability is below beta.
std::vector<std::size_t> prune_keep(std::span<const double> confidences, std::span<const double> matchability,
                                    double threshold, double beta);

/// Removes all rows not listed in `keep` (states, rotation cache, index map).
template <typename T>
void compact(ImageState<T>& image, std::span<const std::size_t> keep);

/// All L layers, then the last head.
template <typename T>
MatchResult plain_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model, double tau,
                          bool two_matrix = false);

/// Layer-by-layer inference with early exit and pruning as configured.
template <typename T>
MatchResult adaptive_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model,
                             const AdaptiveConfig& config, LayerTrace<T>* trace = nullptr);

/// Every layer's head on the full point sets, for training.
template <typename T>
struct DeepPass {
  PairState<T> pair;
  std::vector<Assignment<T>> heads;            // one per layer
  std::vector<Var<T>> states_a, states_b;      // after each layer
};

template <typename T>
DeepPass<T> deep_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model);

}  // namespace glow

#endif  // GLOW_MODEL_ADAPTIVE_HPP_

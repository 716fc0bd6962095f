// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TRAIN_EVALUATE_HPP_
#define GLOW_TRAIN_EVALUATE_HPP_

#include <cstdint>
#include <vector>

#include "glow/geometry/metrics.hpp"
#include "glow/model/adaptive.hpp"
#include "glow/synth/synthgen.hpp"

namespace glow {

/// Mutual nearest neighbours by descriptor dot product; score is the dot
/// product. Ties in a row or column produce no pair.
std::vector<Match> mutual_nn_matches(const FeatureSet& a, const FeatureSet& b);

/// Pairs `first` .. `first + count - 1` of the stream seeded by `seed`.
std::vector<SynthPair> make_pairs(const PairSpec& spec, std::uint64_t seed, std::size_t count,
                                  std::uint64_t first = 0);

/// Final-layer matches of the full network in original point numbering.
template <typename T>
std::vector<Match> final_layer_matches(const DeepPass<T>& pass, double tau);

struct HeldOutReport {
  PrecisionRecall model;            // final layer, pooled
  PrecisionRecall adaptive;         // adaptive inference, pooled
  PrecisionRecall baseline;         // mutual nearest neighbour
  std::vector<double> layer_loss;   // mean per-layer assignment loss over labelled pairs
  std::vector<std::size_t> exit_layers;
  std::vector<double> pruned_fractions;
  double mean_loss = 0;

  double mean_exit_layer() const;
  double median_exit_layer() const;
  double mean_pruned_fraction() const;
};

template <typename T>
HeldOutReport evaluate_held_out(const ModelParams<T>& params, const std::vector<SynthPair>& pairs,
                                const AdaptiveConfig& config, std::size_t jobs = 1);

}  // namespace glow

#endif  // GLOW_TRAIN_EVALUATE_HPP_

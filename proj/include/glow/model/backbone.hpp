// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_MODEL_BACKBONE_HPP_
#define GLOW_MODEL_BACKBONE_HPP_

#include <cstdint>
#include <vector>

#include "glow/features/feature_set.hpp"
#include "glow/model/params.hpp"
#include "glow/model/rope.hpp"

namespace glow {

/// Working set of one image. Rows hold only the points still active; `index`
/// maps each row back to the caller's point numbering.
template <typename T>
struct ImageState {
  Var<T> states;                    // active x d
  std::vector<std::size_t> index;   // row -> original point index
  RotationCache<T> rotation;        // rows aligned with `states`
  std::size_t total = 0;            // number of points in the input

  std::size_t active() const { return index.size(); }
};

template <typename T>
struct PairState {
  ImageState<T> a;
  ImageState<T> b;
};

/// Order in which init_states lays out the rows of one image: sorted by
/// position, then descriptor, so that reordering the input file does not
/// change any computed value.
std::vector<std::size_t> canonical_order(const FeatureSet& fs);

/// Projects descriptors to the model width and builds the rotation caches.
/// Throws InvalidInput if a descriptor width differs from the model's.
template <typename T>
PairState<T> init_states(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model);

template <typename T>
void self_attention_unit(ImageState<T>& image, const SelfUnit<Var<T>>& unit, std::size_t heads);

/// Skipped (states unchanged) when either image has no active point.
/// `two_matrix` computes the B-side similarity separately; used only to
/// measure the cost of not sharing it.
template <typename T>
void cross_attention_unit(PairState<T>& pair, const CrossUnit<Var<T>>& unit, std::size_t heads,
                          bool two_matrix = false);

/// Self-attention on A, then on B, then cross-attention. `layer` is 0-based.
template <typename T>
void run_layer(PairState<T>& pair, const BoundModel<T>& model, std::size_t layer,
               bool two_matrix = false);

/// Pre-softmax self-attention scores of one image, one matrix per head.
template <typename T>
std::vector<Matrix<T>> self_attention_scores(const ImageState<T>& image, const SelfUnit<Var<T>>& unit,
                                             std::size_t heads);

/// Scaled cross-image similarity k_a k_b^T / sqrt(d_head), one matrix per head.
template <typename T>
std::vector<Matrix<T>> cross_similarity(const PairState<T>& pair, const CrossUnit<Var<T>>& unit,
                                        std::size_t heads);

/// Multiply-accumulates of init_states plus `layers` full layers with m and
/// n active points, excluding heads and classifiers.
std::uint64_t backbone_macs(const Hyper& hyper, std::size_t m, std::size_t n, std::size_t layers);

}  // namespace glow

#endif  // GLOW_MODEL_BACKBONE_HPP_

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Rotary relative positional encoding. Each head of width d_head is split
// into d_head/2 coordinate pairs; pair k of point i is rotated by
// theta_ik = b_k . p_i, with a learned 2D frequency b_k shared by all heads
// and layers. Rotating both queries and keys makes their dot product depend
// only on p_j - p_i.

#ifndef GLOW_MODEL_ROPE_HPP_
#define GLOW_MODEL_ROPE_HPP_

#include <random>
#include <span>

#include "glow/num/matrix.hpp"
#include "glow/num/tape.hpp"

namespace glow {

/// Per point, per frequency: cos and sin of theta (N x d_head/2 each).
template <typename T>
struct RotationCache {
  Var<T> cos;
  Var<T> sin;
};

/// basis is (d_head/2) x 2, normalized points N x 2.
template <typename T>
RotationCache<T> build_rotation_cache(const Var<T>& points, const Var<T>& basis);

template <typename T>
RotationCache<T> gather_cache(const RotationCache<T>& cache, std::span<const std::size_t> rows);

/// Rotates consecutive pairs (v[2k], v[2k+1]) by the angle with the given
/// cos[k], sin[k]. Width must be even.
template <typename T>
void apply_rotation(std::span<T> v, std::span<const T> cos, std::span<const T> sin);

/// Frequencies drawn from N(0, 1) per coordinate.
template <typename T>
Matrix<T> init_rotary_basis(std::size_t head_dim, std::mt19937_64& rng);

}  // namespace glow

#endif  // GLOW_MODEL_ROPE_HPP_

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/model/rope.hpp"

#include "glow/num/flops.hpp"

namespace glow {

template <typename T>
RotationCache<T> build_rotation_cache(const Var<T>& points, const Var<T>& basis) {
  require(points.cols() == 2 || points.rows() == 0, "rotation cache: points must be N x 2");
  require(basis.cols() == 2, "rotation cache: basis must be (d_head/2) x 2");
  PhaseScope phase(Phase::kProjection);
  Var<T> p = points.cols() == 2 ? points : Var<T>(Matrix<T>(0, 2));
  Var<T> angles = ad::matmul_nt(p, basis);
  return {ad::cos(angles), ad::sin(angles)};
}

template <typename T>
RotationCache<T> gather_cache(const RotationCache<T>& cache, std::span<const std::size_t> rows) {
  return {ad::gather_rows(cache.cos, rows), ad::gather_rows(cache.sin, rows)};
}

template <typename T>
void apply_rotation(std::span<T> v, std::span<const T> cos, std::span<const T> sin) {
  require(v.size() % 2 == 0, "apply_rotation: vector width must be even");
  require(cos.size() == v.size() / 2 && sin.size() == v.size() / 2,
          "apply_rotation: need one angle per coordinate pair");
  for (std::size_t k = 0; k < cos.size(); ++k) {
    const T x0 = v[2 * k], x1 = v[2 * k + 1];
    v[2 * k] = x0 * cos[k] - x1 * sin[k];
    v[2 * k + 1] = x0 * sin[k] + x1 * cos[k];
  }
}

template <typename T>
Matrix<T> init_rotary_basis(std::size_t head_dim, std::mt19937_64& rng) {
  require(head_dim % 2 == 0, "rotary basis: head width must be even");
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix<T> b(head_dim / 2, 2);
  for (auto& v : b.values()) v = T(dist(rng));
  return b;
}

#define GLOW_INSTANTIATE(T)                                                                   \
  template RotationCache<T> build_rotation_cache(const Var<T>&, const Var<T>&);                \
  template RotationCache<T> gather_cache(const RotationCache<T>&, std::span<const std::size_t>); \
  template void apply_rotation(std::span<T>, std::span<const T>, std::span<const T>);         \
  template Matrix<T> init_rotary_basis<T>(std::size_t, std::mt19937_64&);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

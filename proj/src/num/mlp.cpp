// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/num/mlp.hpp"

#include <cmath>

namespace glow {

template <typename T>
Linear<Matrix<T>> make_linear(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  // Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and biases.
  const double bound = 1.0 / std::sqrt(double(std::max<std::size_t>(in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Linear<Matrix<T>> p{Matrix<T>(in, out), Matrix<T>(1, out)};
  for (auto& v : p.weight.values()) v = T(dist(rng));
  for (auto& v : p.bias.values()) v = T(dist(rng));
  return p;
}

template <typename T>
MlpBlock<Matrix<T>> make_mlp_block(std::size_t in, std::size_t hidden, std::size_t out,
                                   std::mt19937_64& rng) {
  MlpBlock<Matrix<T>> p;
  p.hidden = make_linear<T>(in, hidden, rng);
  p.norm_scale = Matrix<T>(1, hidden, T(1));
  p.norm_shift = Matrix<T>(1, hidden, T(0));
  p.output = make_linear<T>(hidden, out, rng);
  return p;
}

template <typename T>
Var<T> apply_linear(const Var<T>& x, const Linear<Var<T>>& p) {
  require(x.cols() == p.weight.rows(),
          "linear: input width " + std::to_string(x.cols()) + " != " + std::to_string(p.weight.rows()));
  return ad::affine(x, p.weight, p.bias);
}

template <typename T>
Var<T> mlp_block(const Var<T>& x, const MlpBlock<Var<T>>& p) {
  Var<T> h = apply_linear(x, p.hidden);
  h = ad::layer_norm(h, p.norm_scale, p.norm_shift);
  h = ad::gelu(h);
  return apply_linear(h, p.output);
}

template <typename T>
Matrix<T> mlp_block(const Matrix<T>& x, const MlpBlock<Matrix<T>>& p) {
  MlpBlock<Var<T>> v{{Var<T>(p.hidden.weight), Var<T>(p.hidden.bias)},
                     Var<T>(p.norm_scale),
                     Var<T>(p.norm_shift),
                     {Var<T>(p.output.weight), Var<T>(p.output.bias)}};
  return mlp_block(Var<T>(x), v).value();
}

#define GLOW_INSTANTIATE(T)                                                                   \
  template Linear<Matrix<T>> make_linear<T>(std::size_t, std::size_t, std::mt19937_64&);      \
  template MlpBlock<Matrix<T>> make_mlp_block<T>(std::size_t, std::size_t, std::size_t,       \
                                                 std::mt19937_64&);                           \
  template Var<T> apply_linear(const Var<T>&, const Linear<Var<T>>&);                         \
  template Var<T> mlp_block(const Var<T>&, const MlpBlock<Var<T>>&);                          \
  template Matrix<T> mlp_block(const Matrix<T>&, const MlpBlock<Matrix<T>>&);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

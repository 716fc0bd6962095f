// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_NUM_MLP_HPP_
#define GLOW_NUM_MLP_HPP_

#include <random>
#include <string>

#include "glow/num/matrix.hpp"
#include "glow/num/tape.hpp"

namespace glow {

// Parameter containers are templated on their storage so that the same
// layout holds plain matrices (M = Matrix<T>) or tape variables (M = Var<T>).

/// y = x * weight + bias; weight is (in x out), bias is (1 x out).
template <typename M>
struct Linear {
  M weight;
  M bias;

  template <typename Self, typename F>
  static void each(Self& self, const std::string& prefix, F&& f) {
    f(prefix + ".weight", self.weight);
    f(prefix + ".bias", self.bias);
  }
};

/// Linear(in, hidden) -> LayerNorm -> GeLU -> Linear(hidden, out).
template <typename M>
struct MlpBlock {
  Linear<M> hidden;
  M norm_scale;
  M norm_shift;
  Linear<M> output;

  template <typename Self, typename F>
  static void each(Self& self, const std::string& prefix, F&& f) {
    Linear<M>::each(self.hidden, prefix + ".hidden", f);
    f(prefix + ".norm.scale", self.norm_scale);
    f(prefix + ".norm.shift", self.norm_shift);
    Linear<M>::each(self.output, prefix + ".output", f);
  }
};

template <typename T>
Linear<Matrix<T>> make_linear(std::size_t in, std::size_t out, std::mt19937_64& rng);

template <typename T>
MlpBlock<Matrix<T>> make_mlp_block(std::size_t in, std::size_t hidden, std::size_t out,
                                   std::mt19937_64& rng);

template <typename T>
Var<T> apply_linear(const Var<T>& x, const Linear<Var<T>>& p);

template <typename T>
Var<T> mlp_block(const Var<T>& x, const MlpBlock<Var<T>>& p);

/// Value-only convenience wrapper.
template <typename T>
Matrix<T> mlp_block(const Matrix<T>& x, const MlpBlock<Matrix<T>>& p);

}  // namespace glow

#endif  // GLOW_NUM_MLP_HPP_

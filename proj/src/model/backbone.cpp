// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/model/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "glow/num/flops.hpp"
#include "glow/num/kernels.hpp"

namespace glow {
namespace {

template <typename T>
ImageState<T> init_image(const FeatureSet& fs, const BoundModel<T>& model) {
  if (fs.descriptor_dim() != model.hyper.input_dim && fs.size() > 0)
    throw InvalidInput("descriptor width " + std::to_string(fs.descriptor_dim()) +
                       " does not match the model input width " + std::to_string(model.hyper.input_dim));
  ImageState<T> s;
  s.total = fs.size();
  s.index = canonical_order(fs);
  const NormalizedPoints<T> np = normalize_points<T>(fs);
  Matrix<T> coords(s.total, 2);
  Matrix<T> desc(s.total, model.hyper.input_dim);
  for (std::size_t r = 0; r < s.total; ++r) {
    const std::size_t i = s.index[r];
    coords(r, 0) = np.coords(i, 0);
    coords(r, 1) = np.coords(i, 1);
    for (std::size_t c = 0; c < desc.cols(); ++c) desc(r, c) = T(fs.descriptors(i, c));
  }
  PhaseScope phase(Phase::kProjection);
  s.states = apply_linear(Var<T>(std::move(desc)), model.weights.input);
  s.rotation = build_rotation_cache(Var<T>(std::move(coords)), model.weights.rope_basis);
  return s;
}

template <typename T>
Var<T> residual_update(const Var<T>& x, const Var<T>& message, const MlpBlock<Var<T>>& mlp) {
  PhaseScope phase(Phase::kUpdate);
  return ad::add(x, mlp_block(ad::concat_cols(x, message), mlp));
}

template <typename T>
std::vector<Matrix<T>> per_head_products(const Matrix<T>& a, const Matrix<T>& b, std::size_t heads) {
  const std::size_t dh = a.cols() / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  std::vector<Matrix<T>> out;
  for (std::size_t h = 0; h < heads; ++h) {
    Matrix<T> s(a.rows(), b.rows());
    s.eigen().noalias() = a.eigen().middleCols(h * dh, dh) * b.eigen().middleCols(h * dh, dh).transpose();
    s.eigen() *= scale;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> canonical_order(const FeatureSet& fs) {
  std::vector<std::size_t> order(fs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t w = fs.descriptor_dim();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (fs.points(i, 0) != fs.points(j, 0)) return fs.points(i, 0) < fs.points(j, 0);
    if (fs.points(i, 1) != fs.points(j, 1)) return fs.points(i, 1) < fs.points(j, 1);
    const float* di = fs.descriptors.data() + i * w;
    const float* dj = fs.descriptors.data() + j * w;
    return std::lexicographical_compare(di, di + w, dj, dj + w);
  });
  return order;
}

template <typename T>
PairState<T> init_states(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model) {
  return {init_image(a, model), init_image(b, model)};
}

template <typename T>
void self_attention_unit(ImageState<T>& image, const SelfUnit<Var<T>>& unit, std::size_t heads) {
  if (image.active() == 0) return;
  Var<T> q, k, v;
  {
    PhaseScope phase(Phase::kProjection);
    q = ad::rotate_pairs(apply_linear(image.states, unit.query), image.rotation.cos, image.rotation.sin, heads);
    k = ad::rotate_pairs(apply_linear(image.states, unit.key), image.rotation.cos, image.rotation.sin, heads);
    v = apply_linear(image.states, unit.value);
  }
  Var<T> message;
  {
    PhaseScope phase(Phase::kSelfAttention);
    message = ad::attention(q, k, v, heads);
  }
  {
    PhaseScope phase(Phase::kProjection);
    message = apply_linear(message, unit.merge);
  }
  image.states = residual_update(image.states, message, unit.update);
}

template <typename T>
void cross_attention_unit(PairState<T>& pair, const CrossUnit<Var<T>>& unit, std::size_t heads,
                          bool two_matrix) {
  if (pair.a.active() == 0 || pair.b.active() == 0) {
    spdlog::debug("cross-attention skipped: {} x {} active points", pair.a.active(), pair.b.active());
    return;
  }
  Var<T> ka, kb, va, vb;
  {
    PhaseScope phase(Phase::kProjection);
    ka = apply_linear(pair.a.states, unit.key);
    kb = apply_linear(pair.b.states, unit.key);
    va = apply_linear(pair.a.states, unit.value);
    vb = apply_linear(pair.b.states, unit.value);
  }
  auto [to_a, to_b] = ad::bidirectional_attention(ka, kb, va, vb, heads, two_matrix);
  {
    PhaseScope phase(Phase::kProjection);
    to_a = apply_linear(to_a, unit.merge);
    to_b = apply_linear(to_b, unit.merge);
  }
  pair.a.states = residual_update(pair.a.states, to_a, unit.update);
  pair.b.states = residual_update(pair.b.states, to_b, unit.update);
}

template <typename T>
void run_layer(PairState<T>& pair, const BoundModel<T>& model, std::size_t layer, bool two_matrix) {
  require(layer < model.weights.layers.size(), "run_layer: layer index out of range");
  const LayerWeights<Var<T>>& w = model.weights.layers[layer];
  self_attention_unit(pair.a, w.self, model.hyper.heads);
  self_attention_unit(pair.b, w.self, model.hyper.heads);
  cross_attention_unit(pair, w.cross, model.hyper.heads, two_matrix);
}

template <typename T>
std::vector<Matrix<T>> self_attention_scores(const ImageState<T>& image, const SelfUnit<Var<T>>& unit,
                                             std::size_t heads) {
  FlopScope uncounted(nullptr);
  const Var<T> q =
      ad::rotate_pairs(apply_linear(image.states, unit.query), image.rotation.cos, image.rotation.sin, heads);
  const Var<T> k =
      ad::rotate_pairs(apply_linear(image.states, unit.key), image.rotation.cos, image.rotation.sin, heads);
  return per_head_products(q.value(), k.value(), heads);
}

template <typename T>
std::vector<Matrix<T>> cross_similarity(const PairState<T>& pair, const CrossUnit<Var<T>>& unit,
                                        std::size_t heads) {
  FlopScope uncounted(nullptr);
  const Var<T> ka = apply_linear(pair.a.states, unit.key);
  const Var<T> kb = apply_linear(pair.b.states, unit.key);
  return per_head_products(ka.value(), kb.value(), heads);
}

std::uint64_t backbone_macs(const Hyper& hyper, std::size_t m, std::size_t n, std::size_t layers) {
  const std::uint64_t d = hyper.dim, k = m + n;
  const std::uint64_t init = k * hyper.input_dim * d + k * hyper.head_dim();
  // Self unit: q, k, v, merge (4 d^2) + update MLP (2d x 2d and 2d x d).
  const std::uint64_t self = k * 10 * d * d + 2 * d * (std::uint64_t(m) * m + std::uint64_t(n) * n);
  // Cross unit: key, value, merge (3 d^2) + update MLP; similarity once, two weighted sums.
  const std::uint64_t cross = (m > 0 && n > 0) ? k * 9 * d * d + 3 * std::uint64_t(m) * n * d : 0;
  return init + layers * (self + cross);
}

#define GLOW_INSTANTIATE(T)                                                                           \
  template PairState<T> init_states(const FeatureSet&, const FeatureSet&, const BoundModel<T>&);     \
  template void self_attention_unit(ImageState<T>&, const SelfUnit<Var<T>>&, std::size_t);           \
  template void cross_attention_unit(PairState<T>&, const CrossUnit<Var<T>>&, std::size_t, bool);    \
  template void run_layer(PairState<T>&, const BoundModel<T>&, std::size_t, bool);                   \
  template std::vector<Matrix<T>> self_attention_scores(const ImageState<T>&, const SelfUnit<Var<T>>&, \
                                                        std::size_t);                                \
  template std::vector<Matrix<T>> cross_similarity(const PairState<T>&, const CrossUnit<Var<T>>&,     \
                                                   std::size_t);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

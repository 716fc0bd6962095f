// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_MODEL_PARAMS_HPP_
#define GLOW_MODEL_PARAMS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glow/num/matrix.hpp"
#include "glow/num/mlp.hpp"
#include "glow/num/tape.hpp"

namespace glow {

struct Hyper {
  std::uint32_t layers = 9;
  std::uint32_t dim = 256;
  std::uint32_t heads = 4;
  std::uint32_t input_dim = 256;

  std::uint32_t head_dim() const { return dim / heads; }
  /// Throws InvalidInput on inconsistent sizes.
  void validate() const;
  friend bool operator==(const Hyper&, const Hyper&) = default;
};

template <typename M>
struct SelfUnit {
  Linear<M> query, key, value, merge;
  MlpBlock<M> update;

  template <typename Self, typename F>
  static void each(Self& s, const std::string& p, F&& f) {
    Linear<M>::each(s.query, p + ".query", f);
    Linear<M>::each(s.key, p + ".key", f);
    Linear<M>::each(s.value, p + ".value", f);
    Linear<M>::each(s.merge, p + ".merge", f);
    MlpBlock<M>::each(s.update, p + ".update", f);
  }
};

/// Cross-attention has a single key projection that doubles as the query.
template <typename M>
struct CrossUnit {
  Linear<M> key, value, merge;
  MlpBlock<M> update;

  template <typename Self, typename F>
  static void each(Self& s, const std::string& p, F&& f) {
    Linear<M>::each(s.key, p + ".key", f);
    Linear<M>::each(s.value, p + ".value", f);
    Linear<M>::each(s.merge, p + ".merge", f);
    MlpBlock<M>::each(s.update, p + ".update", f);
  }
};

template <typename M>
struct HeadParams {
  Linear<M> projection;    // d -> d, shared by both images
  Linear<M> matchability;  // d -> 1

  template <typename Self, typename F>
  static void each(Self& s, const std::string& p, F&& f) {
    Linear<M>::each(s.projection, p + ".projection", f);
    Linear<M>::each(s.matchability, p + ".matchability", f);
  }
};

template <typename M>
struct LayerWeights {
  SelfUnit<M> self;
  CrossUnit<M> cross;
  HeadParams<M> head;

  template <typename Self, typename F>
  static void each(Self& s, const std::string& p, F&& f) {
    SelfUnit<M>::each(s.self, p + ".self", f);
    CrossUnit<M>::each(s.cross, p + ".cross", f);
    HeadParams<M>::each(s.head, p + ".head", f);
  }
};

/// All learned weights. Parameter order (also the serialization order):
/// input projection, rotary basis, then per layer self unit, cross unit and
/// head, then the confidence classifiers of layers 1..L-1.
template <typename M>
struct Weights {
  Linear<M> input;
  M rope_basis;  // (d_head/2) x 2
  std::vector<LayerWeights<M>> layers;
  std::vector<Linear<M>> classifiers;  // d -> 1, one per layer 1..L-1

  template <typename Self, typename F>
  static void each(Self& s, F&& f) {
    Linear<M>::each(s.input, "input", f);
    f(std::string("rope.basis"), s.rope_basis);
    for (std::size_t l = 0; l < s.layers.size(); ++l)
      LayerWeights<M>::each(s.layers[l], "layer" + std::to_string(l + 1), f);
    for (std::size_t l = 0; l < s.classifiers.size(); ++l)
      Linear<M>::each(s.classifiers[l], "classifier" + std::to_string(l + 1), f);
  }
};

template <typename T>
struct ModelParams {
  Hyper hyper;
  Weights<Matrix<T>> weights;

  std::size_t scalar_count() const;
  /// Pointers to every parameter matrix in serialization order.
  std::vector<Matrix<T>*> flat();
  std::vector<const Matrix<T>*> flat() const;
  std::vector<std::string> names() const;
};

template <typename T>
bool bit_equal(const ModelParams<T>& a, const ModelParams<T>& b);

template <typename T>
ModelParams<T> init_model(const Hyper& hyper, std::uint64_t seed);

/// Parameters as tape variables. With a tape every parameter is a leaf;
/// without one they are constants for inference.
template <typename T>
struct BoundModel {
  Hyper hyper;
  Weights<Var<T>> weights;

  std::vector<const Var<T>*> flat() const;
};

template <typename T>
BoundModel<T> bind(const ModelParams<T>& params, Tape<T>* tape);

/// Gradient of every parameter after tape.backward(), in serialization order.
template <typename T>
std::vector<Matrix<T>> gradients(const BoundModel<T>& bound, const Tape<T>& tape);

// Weights container (little-endian):
//   "GLWT" | u32 version = 1 | u32 scalar bytes (4 or 8) | u32 L | u32 d |
//   u32 h | u32 d_in | u64 scalar count | parameters in serialization order,
//   each matrix row-major | u32 section flag (0 none, 1 training state) |
//   [u64 length | training state bytes] | u64 FNV-1a of all preceding bytes
struct WeightsFile {
  std::uint32_t scalar_bytes = 4;
  std::vector<std::uint8_t> training_state;  // opaque, empty if absent
};

template <typename T>
std::vector<std::uint8_t> encode_weights(const ModelParams<T>& params, std::uint32_t scalar_bytes,
                                         std::span<const std::uint8_t> training_state = {});
/// Decodes into precision T, converting if the file uses the other width.
template <typename T>
ModelParams<T> decode_weights(std::span<const std::uint8_t> bytes, WeightsFile* meta = nullptr);

template <typename T>
void save_weights(const ModelParams<T>& params, const std::filesystem::path& path,
                  std::uint32_t scalar_bytes = 4, std::span<const std::uint8_t> training_state = {});
template <typename T>
ModelParams<T> load_weights(const std::filesystem::path& path, WeightsFile* meta = nullptr);

/// Reads only the hyperparameters from a weights file.
Hyper peek_hyper(const std::filesystem::path& path);

}  // namespace glow

#endif  // GLOW_MODEL_PARAMS_HPP_

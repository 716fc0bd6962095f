// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Matrix-granularity reverse-mode differentiation.
//
// A Var is a value plus, when it depends on a trainable leaf, a node on a
// Tape. Ops run eagerly; when any input is on a tape the op records a
// closure that maps the output adjoint to its inputs' adjoints. Without a
// tape the same ops are plain value computations, so inference and training
// share one code path.

#ifndef GLOW_NUM_TAPE_HPP_
#define GLOW_NUM_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "glow/num/matrix.hpp"

namespace glow {

template <typename T>
class Tape;

template <typename T>
struct Node {
  Matrix<T> value;
  Matrix<T> grad;
  bool has_grad = false;
  bool requires_grad = false;
  Tape<T>* tape = nullptr;
  std::function<void(const Matrix<T>&)> backward;

  /// Adjoint buffer, zero-initialized on first use.
  Matrix<T>& grad_buffer() {
    if (!has_grad) {
      grad = Matrix<T>(value.rows(), value.cols());
      has_grad = true;
    }
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() : node_(std::make_shared<Node<T>>()) {}
  explicit Var(Matrix<T> value) : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
  }
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  const Matrix<T>& value() const { return node_->value; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  Tape<T>* tape() const { return node_->tape; }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable input; its gradient is available after backward().
  Var<T> leaf(Matrix<T> value);

  /// Runs the reverse sweep from a 1x1 output recorded on this tape. Each
  /// recorded node is visited once, newest first.
  void backward(const Var<T>& output);

  /// Adjoint of `v`; all zeros if `v` did not influence the output.
  Matrix<T> grad(const Var<T>& v) const;

  std::size_t size() const { return nodes_.size(); }

  /// Creates the output node of an op. Records it (with `backward`) if any
  /// input requires a gradient; otherwise returns a constant.
  static Var<T> record(Matrix<T> value, std::initializer_list<const Var<T>*> inputs,
                       std::function<void(const Matrix<T>&)> backward);

 private:
  std::vector<std::shared_ptr<Node<T>>> nodes_;
};

/// Adds `g` into the adjoint of `v` if `v` is differentiable.
template <typename T>
void accumulate_grad(const Var<T>& v, const Matrix<T>& g);

/// True if the adjoint of `v` should be computed.
template <typename T>
inline bool wants_grad(const Var<T>& v) {
  return v.requires_grad();
}

namespace ad {

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);
/// a * b^T
template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);
/// x * w + bias
template <typename T>
Var<T> affine(const Var<T>& x, const Var<T>& w, const Var<T>& bias);
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& a, T s);
template <typename T>
Var<T> concat_cols(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta);
template <typename T>
Var<T> gelu(const Var<T>& x);
template <typename T>
Var<T> sigmoid(const Var<T>& x);
template <typename T>
Var<T> log_sigmoid(const Var<T>& x);
template <typename T>
Var<T> cos(const Var<T>& x);
template <typename T>
Var<T> sin(const Var<T>& x);
template <typename T>
Var<T> softmax_rows(const Var<T>& x);
template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> mean(const Var<T>& x);
/// Column vector of x(i, j) for each (i, j) in `at`.
template <typename T>
Var<T> pick(const Var<T>& x, std::span<const std::pair<std::size_t, std::size_t>> at);
template <typename T>
Var<T> gather_rows(const Var<T>& x, std::span<const std::size_t> rows);
template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end);
/// Same value, cut off from the tape.
template <typename T>
Var<T> detach(const Var<T>& x);

/// Rotates consecutive coordinate pairs of every head slice of x (n x d) by
/// the per-row angles whose cos/sin are given (n x d_head/2 each).
template <typename T>
Var<T> rotate_pairs(const Var<T>& x, const Var<T>& cos, const Var<T>& sin, std::size_t heads);

/// Multi-head scaled dot-product attention: per head,
/// softmax_rows(q k^T / sqrt(d_head)) v. Work is counted under the active phase.
template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::size_t heads);

/// Bidirectional cross-attention over one similarity matrix per head,
/// S = k_a k_b^T / sqrt(d_head). Returns (messages to A, messages to B):
/// rows of A use row-softmax(S) over v_b, rows of B use column-softmax(S)
/// over v_a. `two_matrix` recomputes k_b k_a^T separately for the B side,
/// as a reference for FLOP accounting; values are unchanged.
template <typename T>
std::pair<Var<T>, Var<T>> bidirectional_attention(const Var<T>& k_a, const Var<T>& k_b,
                                                   const Var<T>& v_a, const Var<T>& v_b,
                                                   std::size_t heads, bool two_matrix = false);

/// log P = log sig(z_a)_i + log sig(z_b)_j + log colsoftmax(S)_ij + log rowsoftmax(S)_ij
template <typename T>
Var<T> log_assignment(const Var<T>& scores, const Var<T>& z_a, const Var<T>& z_b);

/// Mean binary cross-entropy of sigmoid(logits) against 0/1 labels.
template <typename T>
Var<T> bce_with_logits(const Var<T>& logits, std::span<const T> labels);

}  // namespace ad
}  // namespace glow

#endif  // GLOW_NUM_TAPE_HPP_

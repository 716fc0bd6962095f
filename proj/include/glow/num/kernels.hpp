// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Value-level dense kernels. Everything here is deterministic: loops run in a
// fixed order and products go through a single-threaded GEMM.

#ifndef GLOW_NUM_KERNELS_HPP_
#define GLOW_NUM_KERNELS_HPP_

#include <span>

#include "glow/num/matrix.hpp"

namespace glow {

inline constexpr double kLayerNormEps = 1e-5;

/// c (+)= op(a) * op(b). Not FLOP-counted; used by gradient code.
template <typename T>
void gemm(const Matrix<T>& a, bool trans_a, const Matrix<T>& b, bool trans_b, Matrix<T>& c,
          bool accumulate);

/// a * b. Counts a.rows * a.cols * b.cols MACs under the active phase.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// a * b^T. Counts a.rows * a.cols * b.rows MACs.
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);

/// x * w + bias, bias broadcast over rows (1 x out). Counted like matmul.
template <typename T>
Matrix<T> affine(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& bias);

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& m);
template <typename T>
Matrix<T> softmax_cols(const Matrix<T>& m);
template <typename T>
Matrix<T> log_softmax_rows(const Matrix<T>& m);
template <typename T>
Matrix<T> log_softmax_cols(const Matrix<T>& m);

/// Per-row normalization over the feature dimension with learned scale/shift.
template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta);

/// Exact GeLU: x * Phi(x).
template <typename T>
T gelu(T x);
template <typename T>
T gelu_derivative(T x);

template <typename T>
T sigmoid(T x);
/// log(sigmoid(x)) without overflow for large |x|.
template <typename T>
T log_sigmoid(T x);

template <typename T>
Matrix<T> map(const Matrix<T>& m, T (*f)(T));

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& m, std::span<const std::size_t> rows);

}  // namespace glow

#endif  // GLOW_NUM_KERNELS_HPP_

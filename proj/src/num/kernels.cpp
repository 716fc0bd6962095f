// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/num/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "glow/num/flops.hpp"

namespace glow {

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

template <typename T>
bool Matrix<T>::all_finite() const {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
bool bit_equal(const Matrix<T>& a, const Matrix<T>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

template <typename T>
void gemm(const Matrix<T>& a, bool trans_a, const Matrix<T>& b, bool trans_b, Matrix<T>& c,
          bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  require(k == kb, "gemm: inner dimension mismatch " + shape_string(a) + " * " + shape_string(b));
  if (!accumulate || c.rows() != m || c.cols() != n) {
    require(!accumulate, "gemm: accumulate target has wrong shape");
    c = Matrix<T>(m, n);
  }
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) c.fill(T(0));
    return;
  }
  auto out = c.eigen();
  const auto ea = a.eigen();
  const auto eb = b.eigen();
  if (!trans_a && !trans_b) {
    if (accumulate) out.noalias() += ea * eb; else out.noalias() = ea * eb;
  } else if (!trans_a && trans_b) {
    if (accumulate) out.noalias() += ea * eb.transpose(); else out.noalias() = ea * eb.transpose();
  } else if (trans_a && !trans_b) {
    if (accumulate) out.noalias() += ea.transpose() * eb; else out.noalias() = ea.transpose() * eb;
  } else {
    if (accumulate) {
      out.noalias() += ea.transpose() * eb.transpose();
    } else {
      out.noalias() = ea.transpose() * eb.transpose();
    }
  }
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(),
          "matmul: dimension mismatch " + shape_string(a) + " * " + shape_string(b));
  Matrix<T> c;
  gemm(a, false, b, false, c, false);
  count_macs(std::uint64_t(a.rows()) * a.cols() * b.cols());
  return c;
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.cols(),
          "matmul_nt: dimension mismatch " + shape_string(a) + " * " + shape_string(b) + "^T");
  Matrix<T> c;
  gemm(a, false, b, true, c, false);
  count_macs(std::uint64_t(a.rows()) * a.cols() * b.rows());
  return c;
}

template <typename T>
Matrix<T> affine(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& bias) {
  require(bias.rows() == 1 && bias.cols() == w.cols(), "affine: bias must be 1 x out");
  Matrix<T> y = matmul(x, w);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < y.cols(); ++c) row[c] += bias(0, c);
  }
  return y;
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    auto o = out.row(r);
    if (in.empty()) continue;
    const T mx = *std::max_element(in.begin(), in.end());
    T sum = 0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    const T inv = T(1) / sum;
    for (auto& v : o) v *= inv;
  }
  return out;
}

template <typename T>
Matrix<T> log_softmax_rows(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    auto o = out.row(r);
    if (in.empty()) continue;
    const T mx = *std::max_element(in.begin(), in.end());
    T sum = 0;
    for (T v : in) sum += std::exp(v - mx);
    const T lse = mx + std::log(sum);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
  }
  return out;
}

// Column variants walk rows in the outer loop so memory access stays
// contiguous; per-column accumulators keep the summation order fixed.
template <typename T>
Matrix<T> log_softmax_cols(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  if (m.rows() == 0) return out;
  std::vector<T> mx(m.cols(), -std::numeric_limits<T>::infinity());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) mx[c] = std::max(mx[c], in[c]);
  }
  std::vector<T> sum(m.cols(), T(0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) sum[c] += std::exp(in[c] - mx[c]);
  }
  for (std::size_t c = 0; c < m.cols(); ++c) sum[c] = mx[c] + std::log(sum[c]);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) o[c] = in[c] - sum[c];
  }
  return out;
}

template <typename T>
Matrix<T> softmax_cols(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  if (m.rows() == 0) return out;
  std::vector<T> mx(m.cols(), -std::numeric_limits<T>::infinity());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) mx[c] = std::max(mx[c], in[c]);
  }
  std::vector<T> sum(m.cols(), T(0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto in = m.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      o[c] = std::exp(in[c] - mx[c]);
      sum[c] += o[c];
    }
  }
  for (auto& s : sum) s = T(1) / s;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto o = out.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) o[c] *= sum[c];
  }
  return out;
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta) {
  require(gamma.rows() == 1 && gamma.cols() == x.cols() && beta.rows() == 1 &&
              beta.cols() == x.cols(),
          "layer_norm: scale/shift must be 1 x width");
  Matrix<T> out(x.rows(), x.cols());
  const T n = T(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    T mean = 0;
    for (T v : in) mean += v;
    mean /= n;
    T var = 0;
    for (T v : in) var += (v - mean) * (v - mean);
    var /= n;
    const T rstd = T(1) / std::sqrt(var + T(kLayerNormEps));
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = (in[c] - mean) * rstd * gamma(0, c) + beta(0, c);
  }
  return out;
}

template <typename T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::sqrt(T(2))));
}

template <typename T>
T gelu_derivative(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::sqrt(T(2))));
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * T(M_PI));
  return cdf + x * pdf;
}

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
T log_sigmoid(T x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <typename T>
Matrix<T> map(const Matrix<T>& m, T (*f)(T)) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = f(m.data()[i]);
  return out;
}

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& m, std::span<const std::size_t> rows) {
  Matrix<T> out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < m.rows(), "gather_rows: index out of range");
    auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

#define GLOW_INSTANTIATE(T)                                                                     \
  template class Matrix<T>;                                                                     \
  template bool bit_equal(const Matrix<T>&, const Matrix<T>&);                                  \
  template void gemm(const Matrix<T>&, bool, const Matrix<T>&, bool, Matrix<T>&, bool);         \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);                                \
  template Matrix<T> matmul_nt(const Matrix<T>&, const Matrix<T>&);                             \
  template Matrix<T> affine(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);              \
  template Matrix<T> softmax_rows(const Matrix<T>&);                                            \
  template Matrix<T> softmax_cols(const Matrix<T>&);                                            \
  template Matrix<T> log_softmax_rows(const Matrix<T>&);                                        \
  template Matrix<T> log_softmax_cols(const Matrix<T>&);                                        \
  template Matrix<T> layer_norm(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);          \
  template T gelu(T);                                                                           \
  template T gelu_derivative(T);                                                                \
  template T sigmoid(T);                                                                        \
  template T log_sigmoid(T);                                                                    \
  template Matrix<T> map(const Matrix<T>&, T (*)(T));                                           \
  template Matrix<T> gather_rows(const Matrix<T>&, std::span<const std::size_t>);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

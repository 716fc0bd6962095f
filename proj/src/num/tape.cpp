// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/num/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glow/num/flops.hpp"
#include "glow/num/kernels.hpp"

namespace glow {

template <typename T>
Var<T> Tape<T>::leaf(Matrix<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->tape = this;
  nodes_.push_back(node);
  return Var<T>(node);
}

template <typename T>
Var<T> Tape<T>::record(Matrix<T> value, std::initializer_list<const Var<T>*> inputs,
                       std::function<void(const Matrix<T>&)> backward) {
  Tape<T>* tape = nullptr;
  for (const Var<T>* in : inputs) {
    if (!in->requires_grad()) continue;
    require(tape == nullptr || tape == in->tape(), "Tape: inputs recorded on different tapes");
    tape = in->tape();
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (tape != nullptr) {
    node->requires_grad = true;
    node->tape = tape;
    node->backward = std::move(backward);
    tape->nodes_.push_back(node);
  }
  return Var<T>(node);
}

template <typename T>
void Tape<T>::backward(const Var<T>& output) {
  require(output.tape() == this, "backward: output is not recorded on this tape");
  require(output.rows() == 1 && output.cols() == 1, "backward: output must be a 1x1 scalar");
  for (auto& n : nodes_) {
    n->has_grad = false;
    n->grad = Matrix<T>();
  }
  output.node()->grad_buffer()(0, 0) = T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node<T>& n = **it;
    if (n.has_grad && n.backward) n.backward(n.grad);
  }
}

template <typename T>
Matrix<T> Tape<T>::grad(const Var<T>& v) const {
  if (v.node()->has_grad) return v.node()->grad;
  return Matrix<T>(v.rows(), v.cols());
}

template <typename T>
void accumulate_grad(const Var<T>& v, const Matrix<T>& g) {
  if (!v.requires_grad()) return;
  Matrix<T>& buf = v.node()->grad_buffer();
  require(buf.rows() == g.rows() && buf.cols() == g.cols(), "accumulate_grad: shape mismatch");
  T* dst = buf.data();
  const T* src = g.data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
}

namespace ad {
namespace {

template <typename T>
Matrix<T> elementwise(const Matrix<T>& a, const Matrix<T>& b, T (*f)(T, T)) {
  Matrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i], b.data()[i]);
  return out;
}

}  // namespace

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  Matrix<T> out = glow::matmul(a.value(), b.value());
  return Tape<T>::record(std::move(out), {&a, &b}, [a, b](const Matrix<T>& g) {
    if (wants_grad(a)) gemm(g, false, b.value(), true, a.node()->grad_buffer(), true);
    if (wants_grad(b)) gemm(a.value(), true, g, false, b.node()->grad_buffer(), true);
  });
}

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  Matrix<T> out = glow::matmul_nt(a.value(), b.value());
  return Tape<T>::record(std::move(out), {&a, &b}, [a, b](const Matrix<T>& g) {
    if (wants_grad(a)) gemm(g, false, b.value(), false, a.node()->grad_buffer(), true);
    if (wants_grad(b)) gemm(g, true, a.value(), false, b.node()->grad_buffer(), true);
  });
}

template <typename T>
Var<T> affine(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
  Matrix<T> out = glow::affine(x.value(), w.value(), bias.value());
  return Tape<T>::record(std::move(out), {&x, &w, &bias}, [x, w, bias](const Matrix<T>& g) {
    if (wants_grad(x)) gemm(g, false, w.value(), true, x.node()->grad_buffer(), true);
    if (wants_grad(w)) gemm(x.value(), true, g, false, w.node()->grad_buffer(), true);
    if (wants_grad(bias)) {
      Matrix<T>& db = bias.node()->grad_buffer();
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < g.cols(); ++c) db(0, c) += row[c];
      }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  Matrix<T> out = elementwise<T>(a.value(), b.value(), [](T x, T y) { return x + y; });
  return Tape<T>::record(std::move(out), {&a, &b}, [a, b](const Matrix<T>& g) {
    accumulate_grad(a, g);
    accumulate_grad(b, g);
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  Matrix<T> out = a.value();
  for (auto& v : out.values()) v *= s;
  return Tape<T>::record(std::move(out), {&a}, [a, s](const Matrix<T>& g) {
    Matrix<T> ga = g;
    for (auto& v : ga.values()) v *= s;
    accumulate_grad(a, ga);
  });
}

template <typename T>
Var<T> concat_cols(const Var<T>& a, const Var<T>& b) {
  require(a.rows() == b.rows(), "concat_cols: row count mismatch");
  const std::size_t ca = a.cols(), cb = b.cols();
  Matrix<T> out(a.rows(), ca + cb);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.value().row(r).begin(), a.value().row(r).end(), out.row(r).begin());
    std::copy(b.value().row(r).begin(), b.value().row(r).end(), out.row(r).begin() + ca);
  }
  return Tape<T>::record(std::move(out), {&a, &b}, [a, b, ca, cb](const Matrix<T>& g) {
    if (wants_grad(a)) {
      Matrix<T>& ga = a.node()->grad_buffer();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
    }
    if (wants_grad(b)) {
      Matrix<T>& gb = b.node()->grad_buffer();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta) {
  const Matrix<T>& xv = x.value();
  require(gamma.rows() == 1 && gamma.cols() == xv.cols() && beta.rows() == 1 &&
              beta.cols() == xv.cols(),
          "layer_norm: scale/shift must be 1 x width");
  const std::size_t n = xv.rows(), w = xv.cols();
  Matrix<T> xhat(n, w);
  std::vector<T> rstd(n);
  Matrix<T> out(n, w);
  for (std::size_t r = 0; r < n; ++r) {
    auto in = xv.row(r);
    T mean = 0;
    for (T v : in) mean += v;
    mean /= T(w);
    T var = 0;
    for (T v : in) var += (v - mean) * (v - mean);
    var /= T(w);
    rstd[r] = T(1) / std::sqrt(var + T(kLayerNormEps));
    for (std::size_t c = 0; c < w; ++c) {
      xhat(r, c) = (in[c] - mean) * rstd[r];
      out(r, c) = xhat(r, c) * gamma.value()(0, c) + beta.value()(0, c);
    }
  }
  auto saved = std::make_shared<std::pair<Matrix<T>, std::vector<T>>>(std::move(xhat), std::move(rstd));
  return Tape<T>::record(std::move(out), {&x, &gamma, &beta}, [x, gamma, beta, saved](const Matrix<T>& g) {
    const Matrix<T>& xh = saved->first;
    const std::size_t n = g.rows(), w = g.cols();
    if (wants_grad(gamma) || wants_grad(beta)) {
      Matrix<T> dg(1, w), db(1, w);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) {
          dg(0, c) += g(r, c) * xh(r, c);
          db(0, c) += g(r, c);
        }
      accumulate_grad(gamma, dg);
      accumulate_grad(beta, db);
    }
    if (wants_grad(x)) {
      Matrix<T>& gx = x.node()->grad_buffer();
      std::vector<T> dxh(w);
      for (std::size_t r = 0; r < n; ++r) {
        T m1 = 0, m2 = 0;
        for (std::size_t c = 0; c < w; ++c) {
          dxh[c] = g(r, c) * gamma.value()(0, c);
          m1 += dxh[c];
          m2 += dxh[c] * xh(r, c);
        }
        m1 /= T(w);
        m2 /= T(w);
        const T rs = saved->second[r];
        for (std::size_t c = 0; c < w; ++c) gx(r, c) += rs * (dxh[c] - m1 - xh(r, c) * m2);
      }
    }
  });
}

template <typename T>
Var<T> gelu(const Var<T>& x) {
  Matrix<T> out = glow::map<T>(x.value(), &glow::gelu<T>);
  return Tape<T>::record(std::move(out), {&x}, [x](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i)
      gx.data()[i] = g.data()[i] * gelu_derivative(x.value().data()[i]);
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  Matrix<T> out = glow::map<T>(x.value(), &glow::sigmoid<T>);
  auto y = std::make_shared<Matrix<T>>(out);
  return Tape<T>::record(std::move(out), {&x}, [x, y](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = y->data()[i];
      gx.data()[i] = g.data()[i] * s * (T(1) - s);
    }
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> log_sigmoid(const Var<T>& x) {
  Matrix<T> out = glow::map<T>(x.value(), &glow::log_sigmoid<T>);
  return Tape<T>::record(std::move(out), {&x}, [x](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i)
      gx.data()[i] = g.data()[i] * glow::sigmoid(-x.value().data()[i]);
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> cos(const Var<T>& x) {
  Matrix<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::cos(x.value().data()[i]);
  return Tape<T>::record(std::move(out), {&x}, [x](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] = -g.data()[i] * std::sin(x.value().data()[i]);
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> sin(const Var<T>& x) {
  Matrix<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::sin(x.value().data()[i]);
  return Tape<T>::record(std::move(out), {&x}, [x](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] = g.data()[i] * std::cos(x.value().data()[i]);
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> softmax_rows(const Var<T>& x) {
  Matrix<T> out = glow::softmax_rows(x.value());
  auto y = std::make_shared<Matrix<T>>(out);
  return Tape<T>::record(std::move(out), {&x}, [x, y](const Matrix<T>& g) {
    Matrix<T> gx(g.rows(), g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
      T dot = 0;
      for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * (*y)(r, c);
      for (std::size_t c = 0; c < g.cols(); ++c) gx(r, c) = (*y)(r, c) * (g(r, c) - dot);
    }
    accumulate_grad(x, gx);
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T s = 0;
  for (T v : x.value().values()) s += v;
  Matrix<T> out(1, 1, s);
  return Tape<T>::record(std::move(out), {&x}, [x](const Matrix<T>& g) {
    accumulate_grad(x, Matrix<T>(x.rows(), x.cols(), g(0, 0)));
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  require(x.value().size() > 0, "mean: empty input");
  const T n = T(x.value().size());
  T s = 0;
  for (T v : x.value().values()) s += v;
  Matrix<T> out(1, 1, s / n);
  return Tape<T>::record(std::move(out), {&x}, [x, n](const Matrix<T>& g) {
    accumulate_grad(x, Matrix<T>(x.rows(), x.cols(), g(0, 0) / n));
  });
}

template <typename T>
Var<T> pick(const Var<T>& x, std::span<const std::pair<std::size_t, std::size_t>> at) {
  Matrix<T> out(at.size(), 1);
  for (std::size_t k = 0; k < at.size(); ++k) {
    require(at[k].first < x.rows() && at[k].second < x.cols(), "pick: index out of range");
    out(k, 0) = x.value()(at[k].first, at[k].second);
  }
  std::vector<std::pair<std::size_t, std::size_t>> idx(at.begin(), at.end());
  return Tape<T>::record(std::move(out), {&x}, [x, idx = std::move(idx)](const Matrix<T>& g) {
    Matrix<T>& gx = x.node()->grad_buffer();
    for (std::size_t k = 0; k < idx.size(); ++k) gx(idx[k].first, idx[k].second) += g(k, 0);
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& x, std::span<const std::size_t> rows) {
  Matrix<T> out = glow::gather_rows(x.value(), rows);
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return Tape<T>::record(std::move(out), {&x}, [x, idx = std::move(idx)](const Matrix<T>& g) {
    Matrix<T>& gx = x.node()->grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) gx(idx[r], c) += g(r, c);
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= x.rows(), "slice_rows: range out of bounds");
  const std::size_t w = x.cols();
  Matrix<T> out(end - begin, w);
  std::copy(x.value().data() + begin * w, x.value().data() + end * w, out.data());
  return Tape<T>::record(std::move(out), {&x}, [x, begin, w](const Matrix<T>& g) {
    Matrix<T>& gx = x.node()->grad_buffer();
    T* dst = gx.data() + begin * w;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g.data()[i];
  });
}

template <typename T>
Var<T> detach(const Var<T>& x) {
  return Var<T>(x.value());
}

template <typename T>
Var<T> rotate_pairs(const Var<T>& x, const Var<T>& cos, const Var<T>& sin, std::size_t heads) {
  const std::size_t n = x.rows(), d = x.cols();
  require(heads > 0 && d % heads == 0, "rotate_pairs: width not divisible by heads");
  const std::size_t dh = d / heads;
  require(dh % 2 == 0, "rotate_pairs: per-head width must be even");
  const std::size_t half = dh / 2;
  require(cos.rows() == n && sin.rows() == n && cos.cols() == half && sin.cols() == half,
          "rotate_pairs: rotation cache shape mismatch");
  Matrix<T> out(n, d);
  const Matrix<T>& xv = x.value();
  const Matrix<T>& cv = cos.value();
  const Matrix<T>& sv = sin.value();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::size_t i0 = h * dh + 2 * k;
        const T x0 = xv(r, i0), x1 = xv(r, i0 + 1), c = cv(r, k), s = sv(r, k);
        out(r, i0) = x0 * c - x1 * s;
        out(r, i0 + 1) = x0 * s + x1 * c;
      }
    }
  }
  return Tape<T>::record(std::move(out), {&x, &cos, &sin}, [x, cos, sin, heads, dh, half](const Matrix<T>& g) {
    const std::size_t n = g.rows();
    const Matrix<T>& xv = x.value();
    const Matrix<T>& cv = cos.value();
    const Matrix<T>& sv = sin.value();
    Matrix<T>* gx = wants_grad(x) ? &x.node()->grad_buffer() : nullptr;
    Matrix<T>* gc = wants_grad(cos) ? &cos.node()->grad_buffer() : nullptr;
    Matrix<T>* gs = wants_grad(sin) ? &sin.node()->grad_buffer() : nullptr;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t k = 0; k < half; ++k) {
          const std::size_t i0 = h * dh + 2 * k;
          const T g0 = g(r, i0), g1 = g(r, i0 + 1);
          const T x0 = xv(r, i0), x1 = xv(r, i0 + 1), c = cv(r, k), s = sv(r, k);
          if (gx) {
            (*gx)(r, i0) += g0 * c + g1 * s;
            (*gx)(r, i0 + 1) += -g0 * s + g1 * c;
          }
          if (gc) (*gc)(r, k) += g0 * x0 + g1 * x1;
          if (gs) (*gs)(r, k) += -g0 * x1 + g1 * x0;
        }
      }
    }
  });
}

namespace {

template <typename T>
using Block = Eigen::Block<EigenMap<T>>;

template <typename T>
void softmax_rows_inplace(EigenRowMajor<T>& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    const T mx = row.maxCoeff();
    T sum = 0;
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      row(c) = std::exp(row(c) - mx);
      sum += row(c);
    }
    row *= T(1) / sum;
  }
}

template <typename T>
void softmax_cols_into(const EigenRowMajor<T>& s, EigenRowMajor<T>& out) {
  out.resize(s.rows(), s.cols());
  Eigen::Matrix<T, 1, Eigen::Dynamic> mx = s.colwise().maxCoeff();
  Eigen::Matrix<T, 1, Eigen::Dynamic> sum = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      out(r, c) = std::exp(s(r, c) - mx(c));
      sum(c) += out(r, c);
    }
  }
  for (Eigen::Index c = 0; c < s.cols(); ++c) sum(c) = T(1) / sum(c);
  for (Eigen::Index r = 0; r < s.rows(); ++r) out.row(r).array() *= sum.array();
}

// dS = A .* (dA - rowsum(dA .* A)), in place on dA.
template <typename T>
void softmax_rows_backward(const EigenRowMajor<T>& a, EigenRowMajor<T>& da) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const T dot = a.row(r).dot(da.row(r));
    da.row(r).array() = a.row(r).array() * (da.row(r).array() - dot);
  }
}

template <typename T>
void softmax_cols_backward(const EigenRowMajor<T>& a, EigenRowMajor<T>& da) {
  Eigen::Matrix<T, 1, Eigen::Dynamic> dot = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) dot.array() += a.row(r).array() * da.row(r).array();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    da.row(r).array() = a.row(r).array() * (da.row(r).array() - dot.array());
}

}  // namespace

template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::size_t heads) {
  const std::size_t n = q.rows(), m = k.rows(), d = q.cols();
  require(k.cols() == d && v.cols() == d && v.rows() == m, "attention: shape mismatch");
  require(heads > 0 && d % heads == 0, "attention: width not divisible by heads");
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  Matrix<T> out(n, d);
  auto probs = std::make_shared<std::vector<EigenRowMajor<T>>>(heads);
  if (n > 0 && m > 0) {
    auto qe = q.value().eigen();
    auto ke = k.value().eigen();
    auto ve = v.value().eigen();
    auto oe = out.eigen();
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c0 = Eigen::Index(h * dh), w = Eigen::Index(dh);
      EigenRowMajor<T>& a = (*probs)[h];
      a.noalias() = qe.middleCols(c0, w) * ke.middleCols(c0, w).transpose();
      a *= scale;
      softmax_rows_inplace(a);
      oe.middleCols(c0, w).noalias() = a * ve.middleCols(c0, w);
    }
  }
  count_macs(2 * std::uint64_t(n) * m * d);
  return Tape<T>::record(std::move(out), {&q, &k, &v}, [q, k, v, heads, dh, scale, probs](const Matrix<T>& g) {
    const std::size_t n = q.rows(), m = k.rows(), d = q.cols();
    if (n == 0 || m == 0) return;
    auto qe = q.value().eigen();
    auto ke = k.value().eigen();
    auto ve = v.value().eigen();
    auto ge = g.eigen();
    Matrix<T> gq(n, d), gk(m, d), gv(m, d);
    auto gqe = gq.eigen(), gke = gk.eigen(), gve = gv.eigen();
    EigenRowMajor<T> da;
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c0 = Eigen::Index(h * dh), w = Eigen::Index(dh);
      const EigenRowMajor<T>& a = (*probs)[h];
      da.noalias() = ge.middleCols(c0, w) * ve.middleCols(c0, w).transpose();
      gve.middleCols(c0, w).noalias() = a.transpose() * ge.middleCols(c0, w);
      softmax_rows_backward(a, da);
      da *= scale;
      gqe.middleCols(c0, w).noalias() = da * ke.middleCols(c0, w);
      gke.middleCols(c0, w).noalias() = da.transpose() * qe.middleCols(c0, w);
    }
    accumulate_grad(q, gq);
    accumulate_grad(k, gk);
    accumulate_grad(v, gv);
  });
}

template <typename T>
std::pair<Var<T>, Var<T>> bidirectional_attention(const Var<T>& k_a, const Var<T>& k_b,
                                                   const Var<T>& v_a, const Var<T>& v_b,
                                                   std::size_t heads, bool two_matrix) {
  const std::size_t m = k_a.rows(), n = k_b.rows(), d = k_a.cols();
  require(k_b.cols() == d && v_a.cols() == d && v_b.cols() == d && v_a.rows() == m &&
              v_b.rows() == n,
          "bidirectional_attention: shape mismatch");
  require(heads > 0 && d % heads == 0, "bidirectional_attention: width not divisible by heads");
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  struct Saved {
    std::vector<EigenRowMajor<T>> row_probs, col_probs;
  };
  auto saved = std::make_shared<Saved>();
  saved->row_probs.resize(heads);
  saved->col_probs.resize(heads);
  // Rows [0, m) are messages to A, rows [m, m + n) messages to B.
  Matrix<T> out(m + n, d);
  if (m > 0 && n > 0) {
    auto kae = k_a.value().eigen();
    auto kbe = k_b.value().eigen();
    auto vae = v_a.value().eigen();
    auto vbe = v_b.value().eigen();
    auto oe = out.eigen();
    EigenRowMajor<T> sim, sim_ba;
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c0 = Eigen::Index(h * dh), w = Eigen::Index(dh);
      {
        PhaseScope phase(Phase::kCrossSimilarity);
        sim.noalias() = kae.middleCols(c0, w) * kbe.middleCols(c0, w).transpose();
        sim *= scale;
        count_macs(std::uint64_t(m) * n * dh);
        if (two_matrix) {
          sim_ba.noalias() = kbe.middleCols(c0, w) * kae.middleCols(c0, w).transpose();
          sim_ba *= scale;
          count_macs(std::uint64_t(m) * n * dh);
        }
      }
      PhaseScope phase(Phase::kCrossAttention);
      EigenRowMajor<T>& ar = saved->row_probs[h];
      EigenRowMajor<T>& ac = saved->col_probs[h];
      if (two_matrix) {
        EigenRowMajor<T> t = sim_ba;
        softmax_rows_inplace(t);
        ac = t.transpose();
      } else {
        softmax_cols_into(sim, ac);
      }
      ar = std::move(sim);
      softmax_rows_inplace(ar);
      oe.block(0, c0, Eigen::Index(m), w).noalias() = ar * vbe.middleCols(c0, w);
      oe.block(Eigen::Index(m), c0, Eigen::Index(n), w).noalias() = ac.transpose() * vae.middleCols(c0, w);
      count_macs(2 * std::uint64_t(m) * n * dh);
      sim = EigenRowMajor<T>();
    }
  }
  Var<T> both = Tape<T>::record(
      std::move(out), {&k_a, &k_b, &v_a, &v_b},
      [k_a, k_b, v_a, v_b, heads, dh, scale, saved, m, n](const Matrix<T>& g) {
        if (m == 0 || n == 0) return;
        const std::size_t d = k_a.cols();
        auto kae = k_a.value().eigen();
        auto kbe = k_b.value().eigen();
        auto vae = v_a.value().eigen();
        auto vbe = v_b.value().eigen();
        auto ge = g.eigen();
        Matrix<T> gka(m, d), gkb(n, d), gva(m, d), gvb(n, d);
        auto gkae = gka.eigen(), gkbe = gkb.eigen(), gvae = gva.eigen(), gvbe = gvb.eigen();
        EigenRowMajor<T> dar, dac;
        for (std::size_t h = 0; h < heads; ++h) {
          const Eigen::Index c0 = Eigen::Index(h * dh), w = Eigen::Index(dh);
          const EigenRowMajor<T>& ar = saved->row_probs[h];
          const EigenRowMajor<T>& ac = saved->col_probs[h];
          auto g_a = ge.block(0, c0, Eigen::Index(m), w);
          auto g_b = ge.block(Eigen::Index(m), c0, Eigen::Index(n), w);
          dar.noalias() = g_a * vbe.middleCols(c0, w).transpose();
          gvbe.middleCols(c0, w).noalias() = ar.transpose() * g_a;
          dac.noalias() = vae.middleCols(c0, w) * g_b.transpose();
          gvae.middleCols(c0, w).noalias() = ac * g_b;
          softmax_rows_backward(ar, dar);
          softmax_cols_backward(ac, dac);
          dar += dac;
          dar *= scale;
          gkae.middleCols(c0, w).noalias() = dar * kbe.middleCols(c0, w);
          gkbe.middleCols(c0, w).noalias() = dar.transpose() * kae.middleCols(c0, w);
        }
        accumulate_grad(k_a, gka);
        accumulate_grad(k_b, gkb);
        accumulate_grad(v_a, gva);
        accumulate_grad(v_b, gvb);
      });
  return {slice_rows(both, 0, m), slice_rows(both, m, m + n)};
}

template <typename T>
Var<T> log_assignment(const Var<T>& scores, const Var<T>& z_a, const Var<T>& z_b) {
  const std::size_t m = scores.rows(), n = scores.cols();
  require(z_a.rows() == m && z_a.cols() == 1 && z_b.rows() == n && z_b.cols() == 1,
          "log_assignment: matchability logits must be M x 1 and N x 1");
  Matrix<T> lsr = glow::log_softmax_rows(scores.value());
  Matrix<T> lsc = glow::log_softmax_cols(scores.value());
  Matrix<T> out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const T la = glow::log_sigmoid(z_a.value()(i, 0));
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = la + glow::log_sigmoid(z_b.value()(j, 0)) + lsc(i, j) + lsr(i, j);
  }
  auto saved = std::make_shared<std::pair<Matrix<T>, Matrix<T>>>(std::move(lsr), std::move(lsc));
  return Tape<T>::record(std::move(out), {&scores, &z_a, &z_b}, [scores, z_a, z_b, saved](const Matrix<T>& g) {
    const std::size_t m = g.rows(), n = g.cols();
    std::vector<T> row_sum(m, T(0)), col_sum(n, T(0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        row_sum[i] += g(i, j);
        col_sum[j] += g(i, j);
      }
    if (wants_grad(scores)) {
      Matrix<T>& gs = scores.node()->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          gs(i, j) += T(2) * g(i, j) - std::exp(saved->first(i, j)) * row_sum[i] -
                      std::exp(saved->second(i, j)) * col_sum[j];
    }
    if (wants_grad(z_a)) {
      Matrix<T> ga(m, 1);
      for (std::size_t i = 0; i < m; ++i) ga(i, 0) = row_sum[i] * glow::sigmoid(-z_a.value()(i, 0));
      accumulate_grad(z_a, ga);
    }
    if (wants_grad(z_b)) {
      Matrix<T> gb(n, 1);
      for (std::size_t j = 0; j < n; ++j) gb(j, 0) = col_sum[j] * glow::sigmoid(-z_b.value()(j, 0));
      accumulate_grad(z_b, gb);
    }
  });
}

template <typename T>
Var<T> bce_with_logits(const Var<T>& logits, std::span<const T> labels) {
  require(logits.value().size() == labels.size() && !labels.empty(),
          "bce_with_logits: one label per logit required");
  const T n = T(labels.size());
  T total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const T z = logits.value().data()[i];
    total += std::max(z, T(0)) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  std::vector<T> y(labels.begin(), labels.end());
  return Tape<T>::record(Matrix<T>(1, 1, total / n), {&logits}, [logits, y = std::move(y), n](const Matrix<T>& g) {
    Matrix<T> gz(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < y.size(); ++i)
      gz.data()[i] = g(0, 0) * (glow::sigmoid(logits.value().data()[i]) - y[i]) / n;
    accumulate_grad(logits, gz);
  });
}

#define GLOW_INSTANTIATE_AD(T)                                                                  \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                         \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                                      \
  template Var<T> affine(const Var<T>&, const Var<T>&, const Var<T>&);                          \
  template Var<T> add(const Var<T>&, const Var<T>&);                                            \
  template Var<T> scale(const Var<T>&, T);                                                      \
  template Var<T> concat_cols(const Var<T>&, const Var<T>&);                                    \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&);                      \
  template Var<T> gelu(const Var<T>&);                                                          \
  template Var<T> sigmoid(const Var<T>&);                                                       \
  template Var<T> log_sigmoid(const Var<T>&);                                                   \
  template Var<T> cos(const Var<T>&);                                                           \
  template Var<T> sin(const Var<T>&);                                                           \
  template Var<T> softmax_rows(const Var<T>&);                                                  \
  template Var<T> sum(const Var<T>&);                                                           \
  template Var<T> mean(const Var<T>&);                                                          \
  template Var<T> pick(const Var<T>&, std::span<const std::pair<std::size_t, std::size_t>>);    \
  template Var<T> gather_rows(const Var<T>&, std::span<const std::size_t>);                     \
  template Var<T> slice_rows(const Var<T>&, std::size_t, std::size_t);                          \
  template Var<T> detach(const Var<T>&);                                                        \
  template Var<T> rotate_pairs(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t);       \
  template Var<T> attention(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t);          \
  template std::pair<Var<T>, Var<T>> bidirectional_attention(                                   \
      const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&, std::size_t, bool);           \
  template Var<T> log_assignment(const Var<T>&, const Var<T>&, const Var<T>&);                  \
  template Var<T> bce_with_logits(const Var<T>&, std::span<const T>);

GLOW_INSTANTIATE_AD(float)
GLOW_INSTANTIATE_AD(double)

#undef GLOW_INSTANTIATE_AD

}  // namespace ad

template class Tape<float>;
template class Tape<double>;
template void accumulate_grad(const Var<float>&, const Matrix<float>&);
template void accumulate_grad(const Var<double>&, const Matrix<double>&);

}  // namespace glow

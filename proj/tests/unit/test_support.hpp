// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TESTS_UNIT_TEST_SUPPORT_HPP_
#define GLOW_TESTS_UNIT_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "glow/num/matrix.hpp"
#include "glow/num/tape.hpp"

namespace glow::testing {

inline Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                    double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix<double> m(rows, cols);
  for (auto& v : m.values()) v = dist(rng);
  return m;
}

inline Matrix<double> naive_matmul(const Matrix<double>& a, const Matrix<double>& b) {
  Matrix<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

using ScalarFn = std::function<Var<double>(const std::vector<Var<double>>&)>;

/// Largest |a - n| / max(|a|, |n|, 1e-6) between tape gradients and central
/// differences with step `h`, over every entry of every input.
inline double gradient_error(const std::vector<Matrix<double>>& inputs, const ScalarFn& f,
                             double h = 1e-5) {
  Tape<double> tape;
  std::vector<Var<double>> leaves;
  for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
  Var<double> out = f(leaves);
  tape.backward(out);

  auto eval = [&](const std::vector<Matrix<double>>& xs) {
    std::vector<Var<double>> consts;
    for (const auto& m : xs) consts.emplace_back(m);
    return f(consts).value()(0, 0);
  };
  double worst = 0;
  std::vector<Matrix<double>> probe = inputs;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const Matrix<double> analytic = tape.grad(leaves[p]);
    for (std::size_t e = 0; e < inputs[p].size(); ++e) {
      const double x0 = inputs[p].data()[e];
      probe[p].data()[e] = x0 + h;
      const double up = eval(probe);
      probe[p].data()[e] = x0 - h;
      const double down = eval(probe);
      probe[p].data()[e] = x0;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.data()[e];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace glow::testing

#endif  // GLOW_TESTS_UNIT_TEST_SUPPORT_HPP_

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Measurements shared by the unit tests and the acceptance runner. Each
// returns a number that is compared against a tolerance by the caller.

#ifndef GLOW_TESTS_SUPPORT_CHECKS_HPP_
#define GLOW_TESTS_SUPPORT_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "glow/geometry/homography.hpp"
#include "glow/geometry/metrics.hpp"
#include "glow/model/adaptive.hpp"
#include "glow/synth/synthgen.hpp"
#include "glow/train/labels.hpp"
#include "glow/train/loss.hpp"
#include "glow/train/trainer.hpp"

namespace glow::checks {

/// Small pair: B holds shifted copies of all but one point of A plus random
/// extras. Positions sit on a 1/16 px grid so integer shifts are exact in
/// float. Descriptors are random unit vectors.
inline SynthPair toy_pair(std::mt19937_64& rng, std::size_t m, std::size_t n, std::size_t dim) {
  std::uniform_int_distribution<int> x(16 * 20, 16 * 600), y(16 * 20, 16 * 440);
  std::normal_distribution<float> noise(0, 1);
  Homography h = Homography::Identity();
  h(0, 2) = 2;
  h(1, 2) = 1;
  SynthPair p;
  p.a.image_size = p.b.image_size = kSynthFrame;
  p.a.points = Matrix<float>(m, 2);
  p.b.points = Matrix<float>(n, 2);
  p.a.descriptors = Matrix<float>(m, dim);
  p.b.descriptors = Matrix<float>(n, dim);
  for (std::size_t i = 0; i < m; ++i) {
    p.a.points(i, 0) = float(x(rng)) / 16;
    p.a.points(i, 1) = float(y(rng)) / 16;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (j + 1 < std::min(m, n)) {
      p.b.points(j, 0) = p.a.points(j, 0) + 2;
      p.b.points(j, 1) = p.a.points(j, 1) + 1;
    } else {
      p.b.points(j, 0) = float(x(rng)) / 16;
      p.b.points(j, 1) = float(y(rng)) / 16;
    }
  }
  for (auto* d : {&p.a.descriptors, &p.b.descriptors})
    for (std::size_t r = 0; r < d->rows(); ++r) {
      float norm = 0;
      for (std::size_t c = 0; c < dim; ++c) norm += ((*d)(r, c) = noise(rng)) * (*d)(r, c);
      for (std::size_t c = 0; c < dim; ++c) (*d)(r, c) /= std::sqrt(norm);
    }
  p.gt = label_pairs(p.a.points, p.b.points, h);
  return p;
}

/// Deep-supervision assignment loss of one pair, without a tape.
inline double pair_loss(const ModelParams<double>& params, const SynthPair& pair) {
  const BoundModel<double> model = bind(params, static_cast<Tape<double>*>(nullptr));
  const DeepPass<double> pass = deep_forward(pair.a, pair.b, model);
  const RowLabels labels = to_rows(pair.gt, pass.pair.a.index, pass.pair.b.index);
  return assignment_loss<double>(pass.heads, labels)->total.value()(0, 0);
}

struct GradientCheck {
  double max_relative_error = 0;
  std::size_t entries = 0;
  std::vector<bool> touched;  // per parameter matrix: received a non-zero gradient
};

/// Central differences on every entry of every non-classifier parameter,
/// relative error |a - n| / max(|a|, |n|, floor).
inline GradientCheck check_loss_gradient(const ModelParams<double>& params, const SynthPair& pair, double step = 1e-5,
                                         double floor = 1e-6) {
  const PairGradient<double> g = correspondence_gradient(params, pair);
  GradientCheck out;
  ModelParams<double> probe = params;
  const auto names = params.names();
  const auto flat = probe.flat();
  out.touched.assign(flat.size(), false);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (names[i].rfind("classifier", 0) == 0) continue;
    bool nonzero = false;
    for (std::size_t e = 0; e < flat[i]->size(); ++e) {
      double& v = flat[i]->data()[e];
      const double saved = v;
      v = saved + step;
      const double up = pair_loss(probe, pair);
      v = saved - step;
      const double down = pair_loss(probe, pair);
      v = saved;
      const double numeric = (up - down) / (2 * step);
      const double analytic = g.grads[i].data()[e];
      nonzero |= analytic != 0;
      out.max_relative_error = std::max(
          out.max_relative_error,
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor}));
      ++out.entries;
    }
    out.touched[i] = nonzero;
  }
  return out;
}

/// Largest |R^T R - I| over the per-pair rotations of a random basis at random
/// positions, with R assembled column by column from apply_rotation.
inline double rotary_orthogonality_error(std::mt19937_64& rng, std::size_t head_dim = 16, std::size_t points = 50) {
  const Matrix<double> basis = init_rotary_basis<double>(head_dim, rng);
  Matrix<double> coords(points, 2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : coords.values()) v = u(rng);
  const RotationCache<double> cache = build_rotation_cache(Var<double>(coords), Var<double>(basis));
  const std::size_t half = head_dim / 2;
  double worst = 0;
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<double> r(head_dim * head_dim);  // column-major
    for (std::size_t c = 0; c < head_dim; ++c) {
      std::vector<double> e(head_dim, 0.0);
      e[c] = 1;
      apply_rotation<double>(e, std::span(cache.cos.value().data() + p * half, half),
                             std::span(cache.sin.value().data() + p * half, half));
      std::copy(e.begin(), e.end(), r.begin() + c * head_dim);
    }
    for (std::size_t i = 0; i < head_dim; ++i)
      for (std::size_t j = 0; j < head_dim; ++j) {
        double dot = 0;
        for (std::size_t k = 0; k < head_dim; ++k) dot += r[i * head_dim + k] * r[j * head_dim + k];
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
  }
  return worst;
}

inline FeatureSet shifted(FeatureSet fs, float dx, float dy) {
  for (std::size_t i = 0; i < fs.size(); ++i) {
    fs.points(i, 0) += dx;
    fs.points(i, 1) += dy;
  }
  return fs;
}

/// Largest change of the first layer's self-attention scores when every
/// point of A moves by the same offset. Rows are compared in the same
/// canonical order, which a translation preserves.
inline double self_attention_translation_error(const ModelParams<double>& params, const FeatureSet& a,
                                               const FeatureSet& b, float dx, float dy) {
  const BoundModel<double> model = bind(params, static_cast<Tape<double>*>(nullptr));
  const PairState<double> base = init_states(a, b, model);
  const PairState<double> moved = init_states(shifted(a, dx, dy), b, model);
  if (base.a.index != moved.a.index) return std::numeric_limits<double>::infinity();
  const auto s0 = self_attention_scores(base.a, model.weights.layers[0].self, model.hyper.heads);
  const auto s1 = self_attention_scores(moved.a, model.weights.layers[0].self, model.hyper.heads);
  double worst = 0;
  for (std::size_t h = 0; h < s0.size(); ++h)
    for (std::size_t e = 0; e < s0[h].size(); ++e) worst = std::max(worst, std::abs(s0[h].data()[e] - s1[h].data()[e]));
  return worst;
}

inline bool bit_equal(const Matrix<double>& x, const Matrix<double>& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

inline bool transposed_bit_equal(const Matrix<double>& x, const Matrix<double>& y) {
  if (x.rows() != y.cols() || x.cols() != y.rows()) return false;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (std::memcmp(&x(i, j), &y(j, i), sizeof(double)) != 0) return false;
  return true;
}

/// Swapping the images swaps the outputs of every layer's cross unit and
/// transposes its similarity, bit for bit.
inline bool cross_attention_symmetric(const ModelParams<double>& params, const FeatureSet& a, const FeatureSet& b) {
  const BoundModel<double> model = bind(params, static_cast<Tape<double>*>(nullptr));
  PairState<double> ab = init_states(a, b, model);
  PairState<double> ba = init_states(b, a, model);
  for (std::size_t l = 0; l < model.hyper.layers; ++l) {
    const LayerWeights<Var<double>>& w = model.weights.layers[l];
    for (PairState<double>* p : {&ab, &ba}) {
      self_attention_unit(p->a, w.self, model.hyper.heads);
      self_attention_unit(p->b, w.self, model.hyper.heads);
    }
    const auto s_ab = cross_similarity(ab, w.cross, model.hyper.heads);
    const auto s_ba = cross_similarity(ba, w.cross, model.hyper.heads);
    for (std::size_t h = 0; h < s_ab.size(); ++h)
      if (!transposed_bit_equal(s_ab[h], s_ba[h])) return false;
    cross_attention_unit(ab, w.cross, model.hyper.heads);
    cross_attention_unit(ba, w.cross, model.hyper.heads);
    if (!bit_equal(ab.a.states.value(), ba.b.states.value()) || !bit_equal(ab.b.states.value(), ba.a.states.value()))
      return false;
  }
  return true;
}

inline FeatureSet permuted(const FeatureSet& fs, const std::vector<std::size_t>& order) {
  FeatureSet out = fs;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t c = 0; c < 2; ++c) out.points(k, c) = fs.points(order[k], c);
    for (std::size_t c = 0; c < fs.descriptor_dim(); ++c) out.descriptors(k, c) = fs.descriptors(order[k], c);
  }
  return out;
}

/// Reordering the input points permutes the matches and per-point outputs
/// of adaptive inference and every layer's log P, bit for bit.
template <typename T>
bool permutation_equivariant(const ModelParams<T>& params, const FeatureSet& a, const FeatureSet& b,
                             std::mt19937_64& rng) {
  std::vector<std::size_t> pa(a.size()), pb(b.size());
  std::iota(pa.begin(), pa.end(), std::size_t{0});
  std::iota(pb.begin(), pb.end(), std::size_t{0});
  std::shuffle(pa.begin(), pa.end(), rng);
  std::shuffle(pb.begin(), pb.end(), rng);
  const FeatureSet a2 = permuted(a, pa), b2 = permuted(b, pb);
  const BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));

  const MatchResult r1 = adaptive_forward(a, b, model, AdaptiveConfig{});
  const MatchResult r2 = adaptive_forward(a2, b2, model, AdaptiveConfig{});
  // Map r2 back to the original numbering: new index k holds old point p[k].
  MatchResult back = r2;
  for (Match& m : back.pairs) m.a = pa[m.a], m.b = pb[m.b];
  std::sort(back.pairs.begin(), back.pairs.end(), [](const Match& x, const Match& y) { return x.a < y.a; });
  for (std::size_t k = 0; k < pa.size(); ++k) {
    back.match_a[pa[k]] = r2.match_a[k] == kUnmatched ? kUnmatched : std::int64_t(pb[std::size_t(r2.match_a[k])]);
    back.matchability_a[pa[k]] = r2.matchability_a[k];
  }
  for (std::size_t k = 0; k < pb.size(); ++k) {
    back.match_b[pb[k]] = r2.match_b[k] == kUnmatched ? kUnmatched : std::int64_t(pa[std::size_t(r2.match_b[k])]);
    back.matchability_b[pb[k]] = r2.matchability_b[k];
  }
  if (!(back == r1)) return false;

  const DeepPass<T> d1 = deep_forward(a, b, model);
  const DeepPass<T> d2 = deep_forward(a2, b2, model);
  for (std::size_t l = 0; l < d1.heads.size(); ++l) {
    // Both passes work in canonical order, so rows map through the index maps.
    const Matrix<T>& p1 = d1.heads[l].log_p.value();
    const Matrix<T>& p2 = d2.heads[l].log_p.value();
    for (std::size_t i = 0; i < p1.rows(); ++i)
      for (std::size_t j = 0; j < p1.cols(); ++j) {
        if (d1.pair.a.index[i] != pa[d2.pair.a.index[i]] || d1.pair.b.index[j] != pb[d2.pair.b.index[j]]) return false;
        if (std::memcmp(&p1(i, j), &p2(i, j), sizeof(T)) != 0) return false;
      }
  }
  return true;
}

/// With the output layer of an update MLP zeroed, its unit leaves the
/// states bit-identical (self unit on A, then cross unit on both).
inline bool residual_identity(const ModelParams<double>& params, const FeatureSet& a, const FeatureSet& b) {
  ModelParams<double> zeroed = params;
  for (auto& layer : zeroed.weights.layers)
    for (auto* out : {&layer.self.update.output, &layer.cross.update.output}) {
      for (double& v : out->weight.values()) v = 0;
      for (double& v : out->bias.values()) v = 0;
    }
  const BoundModel<double> model = bind(zeroed, static_cast<Tape<double>*>(nullptr));
  PairState<double> pair = init_states(a, b, model);
  for (std::size_t l = 0; l < model.hyper.layers; ++l) {
    const Matrix<double> xa = pair.a.states.value(), xb = pair.b.states.value();
    self_attention_unit(pair.a, model.weights.layers[l].self, model.hyper.heads);
    if (!bit_equal(xa, pair.a.states.value())) return false;
    cross_attention_unit(pair, model.weights.layers[l].cross, model.hyper.heads);
    if (!bit_equal(xa, pair.a.states.value()) || !bit_equal(xb, pair.b.states.value())) return false;
  }
  return true;
}

/// Largest excess of a row (column) sum of P over the row's (column's)
/// matchability, over every layer.
template <typename T>
double assignment_bound_excess(const ModelParams<T>& params, const FeatureSet& a, const FeatureSet& b) {
  const BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));
  const DeepPass<T> pass = deep_forward(a, b, model);
  double worst = -std::numeric_limits<double>::infinity();
  auto sigmoid = [](double z) { return 1 / (1 + std::exp(-z)); };
  for (const Assignment<T>& h : pass.heads) {
    const Matrix<T>& lp = h.log_p.value();
    std::vector<double> cols(lp.cols(), 0.0);
    for (std::size_t i = 0; i < lp.rows(); ++i) {
      double row = 0;
      for (std::size_t j = 0; j < lp.cols(); ++j) {
        row += std::exp(double(lp(i, j)));
        cols[j] += std::exp(double(lp(i, j)));
      }
      worst = std::max(worst, row - sigmoid(double(h.logit_a.value()(i, 0))));
    }
    for (std::size_t j = 0; j < lp.cols(); ++j) worst = std::max(worst, cols[j] - sigmoid(double(h.logit_b.value()(j, 0))));
  }
  return worst;
}

// ---------------------------------------------------------------- geometry

inline Homography random_h(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Homography h;
  h << 1 + 0.1 * n(rng), 0.1 * n(rng), 30 * n(rng),  //
      0.1 * n(rng), 1 + 0.1 * n(rng), 30 * n(rng),   //
      1e-4 * n(rng), 1e-4 * n(rng), 1;
  return h;
}

inline std::vector<PointPair> exact_pairs(const Homography& h, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(0, 640), y(0, 480);
  std::vector<PointPair> out;
  while (out.size() < n) {
    const Point2 a(x(rng), y(rng));
    if (auto b = apply_h(h, a)) out.push_back({a, *b});
  }
  return out;
}

/// Exact pairs of a random homography with the first `outliers` targets
/// displaced by up to 100 px.
inline std::vector<PointPair> contaminated_pairs(std::mt19937_64& rng, std::size_t n, std::size_t outliers,
                                                 Homography* truth = nullptr) {
  const Homography h = random_h(rng);
  auto pairs = exact_pairs(h, n, rng);
  std::uniform_real_distribution<double> off(-100, 100);
  for (std::size_t i = 0; i < outliers; ++i) pairs[i].b += Point2(off(rng), off(rng));
  if (truth) *truth = h;
  return pairs;
}

/// Highest inlier count over the hypotheses fitted to every 4-subset.
inline std::size_t exhaustive_best(const std::vector<PointPair>& pairs, double threshold) {
  std::size_t best = 0;
  const std::size_t n = pairs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          const std::vector<PointPair> sample = {pairs[i], pairs[j], pairs[k], pairs[l]};
          try {
            const auto mask = inlier_mask(dlt(sample), pairs, threshold);
            best = std::max<std::size_t>(best, std::count(mask.begin(), mask.end(), true));
          } catch (const InvalidInput&) {
          }
        }
  return best;
}

/// Midpoint integration of the empirical CDF on a fine grid, normalized.
inline double grid_auc(const std::vector<double>& errors, double threshold, int steps = 200000) {
  double area = 0;
  for (int s = 0; s < steps; ++s) {
    const double e = (s + 0.5) * threshold / steps;
    std::size_t below = 0;
    for (double x : errors) below += x <= e;
    area += double(below) / double(errors.size());
  }
  return area / steps;
}

}  // namespace glow::checks

#endif  // GLOW_TESTS_SUPPORT_CHECKS_HPP_

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/model/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "glow/num/flops.hpp"
#include "glow/num/kernels.hpp"

namespace glow {
namespace {

template <typename T>
std::vector<double> column_sigmoid(const Matrix<T>& logits) {
  std::vector<double> out(logits.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = double(sigmoid(logits(i, 0)));
  return out;
}

template <typename T>
std::vector<double> to_double(const Matrix<T>& column) {
  std::vector<double> out(column.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = double(column(i, 0));
  return out;
}

template <typename T>
std::vector<T> to_vector(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

// Also the final answer when either image has no points: nothing runs.
MatchResult empty_result(std::size_t total_a, std::size_t total_b) {
  MatchResult r;
  r.match_a.assign(total_a, kUnmatched);
  r.match_b.assign(total_b, kUnmatched);
  r.matchability_a.assign(total_a, 0.0);
  r.matchability_b.assign(total_b, 0.0);
  return r;
}

// Runs the head of `layer` (0-based) on the active rows and fills the
// result in original numbering.
template <typename T>
void finish(MatchResult& r, const PairState<T>& pair, const BoundModel<T>& model, std::size_t layer,
            double tau) {
  r.exit_layer = layer + 1;
  const Assignment<T> head = assign(pair.a.states, pair.b.states, model.weights.layers[layer].head);
  const std::vector<double> sa = column_sigmoid(head.logit_a.value());
  const std::vector<double> sb = column_sigmoid(head.logit_b.value());
  for (std::size_t i = 0; i < sa.size(); ++i) r.matchability_a[pair.a.index[i]] = sa[i];
  for (std::size_t j = 0; j < sb.size(); ++j) r.matchability_b[pair.b.index[j]] = sb[j];
  for (const Match& m : extract_matches(head.log_p.value(), tau)) {
    const std::size_t ia = pair.a.index[m.a], ib = pair.b.index[m.b];
    r.pairs.push_back({ia, ib, m.score});
    r.match_a[ia] = std::int64_t(ib);
    r.match_b[ib] = std::int64_t(ia);
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const Match& x, const Match& y) { return x.a < y.a; });
}

template <typename T>
LayerRecord<T> record_layer(const PairState<T>& pair, const BoundModel<T>& model, std::size_t layer) {
  FlopScope uncounted(nullptr);
  LayerRecord<T> rec;
  rec.index_a = pair.a.index;
  rec.index_b = pair.b.index;
  rec.states_a = pair.a.states.value();
  rec.states_b = pair.b.states.value();
  const Assignment<T> head = assign(Var<T>(rec.states_a), Var<T>(rec.states_b), model.weights.layers[layer].head);
  rec.log_p = head.log_p.value();
  rec.sigma_a = to_vector<T>(column_sigmoid(head.logit_a.value()));
  rec.sigma_b = to_vector<T>(column_sigmoid(head.logit_b.value()));
  rec.pruned_a.assign(pair.a.active(), false);
  rec.pruned_b.assign(pair.b.active(), false);
  return rec;
}

}  // namespace

void AdaptiveConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("beta must lie in (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("tau must lie in (0, 1)");
}

double exit_threshold(std::size_t layer, std::size_t layers) {
  require(layers > 0 && layer >= 1 && layer <= layers, "exit_threshold: layer out of range");
  return 0.8 + 0.1 * std::exp(-4.0 * double(layer) / double(layers));
}

template <typename T>
Var<T> confidence(const Var<T>& states, const Linear<Var<T>>& classifier) {
  PhaseScope phase(Phase::kClassifier);
  return ad::sigmoid(apply_linear(ad::detach(states), classifier));
}

bool should_exit(std::span<const double> confidences, std::size_t pruned, double threshold, double alpha) {
  const std::size_t total = confidences.size() + pruned;
  if (total == 0) return true;
  std::size_t confident = pruned;
  for (double c : confidences) confident += c > threshold ? 1 : 0;
  return double(confident) / double(total) > alpha;
}

std::vector<std::size_t> prune_keep(std::span<const double> confidences, std::span<const double> matchability,
                                    double threshold, double beta) {
  require(confidences.size() == matchability.size(), "prune_keep: size mismatch");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < confidences.size(); ++i)
    if (!(confidences[i] > threshold && matchability[i] < beta)) keep.push_back(i);
  return keep;
}

template <typename T>
void compact(ImageState<T>& image, std::span<const std::size_t> keep) {
  if (keep.size() == image.active()) return;
  image.states = ad::gather_rows(image.states, keep);
  image.rotation = gather_cache(image.rotation, keep);
  std::vector<std::size_t> index;
  index.reserve(keep.size());
  for (std::size_t r : keep) index.push_back(image.index[r]);
  image.index = std::move(index);
}

template <typename T>
MatchResult plain_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model, double tau,
                          bool two_matrix) {
  MatchResult r = empty_result(a.size(), b.size());
  if (a.size() == 0 || b.size() == 0) return r;
  PairState<T> pair = init_states(a, b, model);
  const std::size_t layers = model.hyper.layers;
  for (std::size_t l = 0; l < layers; ++l) {
    r.active_a.push_back(pair.a.active());
    r.active_b.push_back(pair.b.active());
    run_layer(pair, model, l, two_matrix);
  }
  finish(r, pair, model, layers - 1, tau);
  return r;
}

template <typename T>
MatchResult adaptive_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model,
                             const AdaptiveConfig& config, LayerTrace<T>* trace) {
  config.validate();
  MatchResult r = empty_result(a.size(), b.size());
  if (a.size() == 0 || b.size() == 0) return r;
  PairState<T> pair = init_states(a, b, model);
  const std::size_t layers = model.hyper.layers;
  const bool adapt = config.depth_enabled || config.width_enabled;
  std::size_t exit_at = layers - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    r.active_a.push_back(pair.a.active());
    r.active_b.push_back(pair.b.active());
    run_layer(pair, model, l, config.two_matrix);
    if (config.retain_trace && trace != nullptr) trace->layers.push_back(record_layer(pair, model, l));
    if (l + 1 == layers || !adapt) continue;

    const double threshold = exit_threshold(l + 1, layers);
    const Linear<Var<T>>& classifier = model.weights.classifiers[l];
    const std::vector<double> ca = to_double(confidence(pair.a.states, classifier).value());
    const std::vector<double> cb = to_double(confidence(pair.b.states, classifier).value());
    if (config.retain_trace && trace != nullptr) {
      trace->layers.back().confidence_a = to_vector<T>(ca);
      trace->layers.back().confidence_b = to_vector<T>(cb);
    }
    if (config.depth_enabled) {
      std::vector<double> all(ca);
      all.insert(all.end(), cb.begin(), cb.end());
      if (should_exit(all, r.pruned_a + r.pruned_b, threshold, config.alpha)) {
        exit_at = l;
        break;
      }
    }
    if (!config.width_enabled) continue;
    std::vector<double> sa, sb;
    {
      PhaseScope phase(Phase::kClassifier);
      const HeadParams<Var<T>>& head = model.weights.layers[l].head;
      sa = column_sigmoid(matchability_logits(pair.a.states, head).value());
      sb = column_sigmoid(matchability_logits(pair.b.states, head).value());
    }
    const std::vector<std::size_t> keep_a = prune_keep(ca, sa, threshold, config.beta);
    const std::vector<std::size_t> keep_b = prune_keep(cb, sb, threshold, config.beta);
    auto mark = [&](const ImageState<T>& image, const std::vector<std::size_t>& keep,
                    const std::vector<double>& sigma, std::vector<double>& matchability,
                    std::vector<bool>* pruned_rows) {
      std::size_t k = 0;
      for (std::size_t row = 0; row < image.active(); ++row) {
        if (k < keep.size() && keep[k] == row) {
          ++k;
          continue;
        }
        matchability[image.index[row]] = sigma[row];
        if (pruned_rows) (*pruned_rows)[row] = true;
      }
    };
    LayerRecord<T>* rec = (config.retain_trace && trace != nullptr) ? &trace->layers.back() : nullptr;
    mark(pair.a, keep_a, sa, r.matchability_a, rec ? &rec->pruned_a : nullptr);
    mark(pair.b, keep_b, sb, r.matchability_b, rec ? &rec->pruned_b : nullptr);
    r.pruned_a += pair.a.active() - keep_a.size();
    r.pruned_b += pair.b.active() - keep_b.size();
    compact(pair.a, keep_a);
    compact(pair.b, keep_b);
  }
  finish(r, pair, model, exit_at, config.tau);
  return r;
}

template <typename T>
DeepPass<T> deep_forward(const FeatureSet& a, const FeatureSet& b, const BoundModel<T>& model) {
  DeepPass<T> out{init_states(a, b, model), {}, {}, {}};
  for (std::size_t l = 0; l < model.hyper.layers; ++l) {
    run_layer(out.pair, model, l);
    out.states_a.push_back(out.pair.a.states);
    out.states_b.push_back(out.pair.b.states);
    out.heads.push_back(assign(out.pair.a.states, out.pair.b.states, model.weights.layers[l].head));
  }
  return out;
}

#define GLOW_INSTANTIATE(T)                                                                               \
  template Var<T> confidence(const Var<T>&, const Linear<Var<T>>&);                                       \
  template void compact(ImageState<T>&, std::span<const std::size_t>);                                    \
  template MatchResult plain_forward(const FeatureSet&, const FeatureSet&, const BoundModel<T>&, double, bool); \
  template MatchResult adaptive_forward(const FeatureSet&, const FeatureSet&, const BoundModel<T>&,       \
                                        const AdaptiveConfig&, LayerTrace<T>*);                          \
  template DeepPass<T> deep_forward(const FeatureSet&, const FeatureSet&, const BoundModel<T>&);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

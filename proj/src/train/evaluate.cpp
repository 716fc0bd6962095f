// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/train/evaluate.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "glow/num/flops.hpp"
#include "glow/num/parallel.hpp"
#include "glow/train/loss.hpp"

namespace glow {
namespace {

struct PairOutcome {
  PrecisionRecall model, adaptive, baseline;
  std::vector<double> layer_loss;  // empty when the pair has no labels
  std::size_t exit_layer = 0;
  double pruned_fraction = 0;
};

}  // namespace

std::vector<Match> mutual_nn_matches(const FeatureSet& a, const FeatureSet& b) {
  const std::size_t m = a.size(), n = b.size();
  require(m == 0 || n == 0 || a.descriptor_dim() == b.descriptor_dim(), "mutual_nn_matches: descriptor width mismatch");
  std::vector<Match> out;
  if (m == 0 || n == 0) return out;
  Matrix<double> s(m, n);
  {
    const auto da = EigenConstMap<float>(a.descriptors.data(), long(m), long(a.descriptor_dim())).cast<double>();
    const auto db = EigenConstMap<float>(b.descriptors.data(), long(n), long(b.descriptor_dim())).cast<double>();
    EigenMap<double>(s.data(), long(m), long(n)) = da * db.transpose();
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> row_best(m, kNone), col_best(n, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    bool tie = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (s(i, j) > best) best = s(i, j), row_best[i] = j, tie = false;
      else if (s(i, j) == best) tie = true;
    }
    if (tie) row_best[i] = kNone;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    bool tie = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (s(i, j) > best) best = s(i, j), col_best[j] = i, tie = false;
      else if (s(i, j) == best) tie = true;
    }
    if (tie) col_best[j] = kNone;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = row_best[i];
    if (j != kNone && col_best[j] == i) out.push_back({i, j, s(i, j)});
  }
  return out;
}

std::vector<SynthPair> make_pairs(const PairSpec& spec, std::uint64_t seed, std::size_t count, std::uint64_t first) {
  std::vector<SynthPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto rng = pair_rng(seed, first + k);
    out.push_back(generate_pair(rng, spec));
  }
  return out;
}

template <typename T>
std::vector<Match> final_layer_matches(const DeepPass<T>& pass, double tau) {
  std::vector<Match> out;
  if (pass.heads.empty()) return out;
  for (Match m : extract_matches(pass.heads.back().log_p.value(), tau)) {
    m.a = pass.pair.a.index[m.a];
    m.b = pass.pair.b.index[m.b];
    out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const Match& x, const Match& y) { return x.a < y.a; });
  return out;
}

double HeldOutReport::mean_exit_layer() const {
  if (exit_layers.empty()) return 0;
  return std::accumulate(exit_layers.begin(), exit_layers.end(), 0.0) / double(exit_layers.size());
}

double HeldOutReport::median_exit_layer() const {
  if (exit_layers.empty()) return 0;
  std::vector<std::size_t> v = exit_layers;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? double(v[k]) : 0.5 * double(v[k - 1] + v[k]);
}

double HeldOutReport::mean_pruned_fraction() const {
  if (pruned_fractions.empty()) return 0;
  return std::accumulate(pruned_fractions.begin(), pruned_fractions.end(), 0.0) / double(pruned_fractions.size());
}

template <typename T>
HeldOutReport evaluate_held_out(const ModelParams<T>& params, const std::vector<SynthPair>& pairs,
                                const AdaptiveConfig& config, std::size_t jobs) {
  config.validate();
  const BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));
  std::vector<PairOutcome> outcomes(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    const SynthPair& p = pairs[k];
    PairOutcome& o = outcomes[k];
    FlopScope off(nullptr);
    const DeepPass<T> pass = deep_forward(p.a, p.b, model);
    o.model = match_pr(final_layer_matches(pass, config.tau), p.a.points, p.b.points, p.gt);
    const RowLabels labels = to_rows(p.gt, pass.pair.a.index, pass.pair.b.index);
    if (const auto loss = assignment_loss<T>(pass.heads, labels)) o.layer_loss = loss->per_layer;
    const MatchResult adaptive = adaptive_forward(p.a, p.b, model, config);
    o.adaptive = match_pr(adaptive.pairs, p.a.points, p.b.points, p.gt);
    o.exit_layer = adaptive.exit_layer;
    o.pruned_fraction = adaptive.pruned_fraction();
    o.baseline = match_pr(mutual_nn_matches(p.a, p.b), p.a.points, p.b.points, p.gt);
  });
  HeldOutReport r;
  r.layer_loss.assign(params.hyper.layers, 0.0);
  std::size_t labelled = 0;
  for (const PairOutcome& o : outcomes) {
    accumulate(r.model, o.model);
    accumulate(r.adaptive, o.adaptive);
    accumulate(r.baseline, o.baseline);
    r.exit_layers.push_back(o.exit_layer);
    r.pruned_fractions.push_back(o.pruned_fraction);
    if (o.layer_loss.empty()) continue;
    ++labelled;
    for (std::size_t l = 0; l < o.layer_loss.size(); ++l) r.layer_loss[l] += o.layer_loss[l];
  }
  if (labelled > 0) {
    for (double& v : r.layer_loss) v /= double(labelled);
    r.mean_loss = std::accumulate(r.layer_loss.begin(), r.layer_loss.end(), 0.0) / double(r.layer_loss.size());
  }
  return r;
}

template std::vector<Match> final_layer_matches(const DeepPass<float>&, double);
template std::vector<Match> final_layer_matches(const DeepPass<double>&, double);
template HeldOutReport evaluate_held_out(const ModelParams<float>&, const std::vector<SynthPair>&,
                                         const AdaptiveConfig&, std::size_t);
template HeldOutReport evaluate_held_out(const ModelParams<double>&, const std::vector<SynthPair>&,
                                         const AdaptiveConfig&, std::size_t);

}  // namespace glow

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/train/loss.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace glow {
namespace {

std::vector<std::size_t> inverse(std::span<const std::size_t> index) {
  std::size_t top = 0;
  for (std::size_t i : index) top = std::max(top, i + 1);
  std::vector<std::size_t> row(top, std::numeric_limits<std::size_t>::max());
  for (std::size_t r = 0; r < index.size(); ++r) row[index[r]] = r;
  return row;
}

std::size_t lookup(const std::vector<std::size_t>& row, std::size_t original, const char* what) {
  if (original >= row.size() || row[original] == std::numeric_limits<std::size_t>::max())
    throw InvalidInput(std::string("ground truth refers to a missing point in ") + what);
  return row[original];
}

template <typename T>
Var<T> negated_log_sigmoid_mean(const Var<T>& logits, std::span<const std::size_t> rows) {
  // log(1 - sigmoid(z)) = log sigmoid(-z)
  return ad::mean(ad::log_sigmoid(ad::scale(ad::gather_rows(logits, rows), T(-1))));
}

}  // namespace

RowLabels to_rows(const GroundTruth& gt, std::span<const std::size_t> index_a, std::span<const std::size_t> index_b) {
  const auto row_a = inverse(index_a), row_b = inverse(index_b);
  RowLabels out;
  for (const auto& [i, j] : gt.inliers) out.matches.emplace_back(lookup(row_a, i, "A"), lookup(row_b, j, "B"));
  for (std::size_t i : gt.unmatched_a) out.unmatched_a.push_back(lookup(row_a, i, "A"));
  for (std::size_t j : gt.unmatched_b) out.unmatched_b.push_back(lookup(row_b, j, "B"));
  return out;
}

template <typename T>
Var<T> layer_loss(const Assignment<T>& head, const RowLabels& labels) {
  Var<T> total(Matrix<T>(1, 1));
  if (!labels.matches.empty()) total = ad::add(total, ad::mean(ad::pick(head.log_p, labels.matches)));
  if (!labels.unmatched_a.empty())
    total = ad::add(total, ad::scale(negated_log_sigmoid_mean(head.logit_a, labels.unmatched_a), T(0.5)));
  if (!labels.unmatched_b.empty())
    total = ad::add(total, ad::scale(negated_log_sigmoid_mean(head.logit_b, labels.unmatched_b), T(0.5)));
  return ad::scale(total, T(-1));
}

template <typename T>
std::optional<AssignmentLoss<T>> assignment_loss(std::span<const Assignment<T>> heads, const RowLabels& labels) {
  require(!heads.empty(), "assignment_loss: no layers");
  if (labels.empty()) {
    spdlog::debug("assignment_loss: pair without labels skipped");
    return std::nullopt;
  }
  AssignmentLoss<T> out;
  Var<T> sum(Matrix<T>(1, 1));
  for (const Assignment<T>& head : heads) {
    const Var<T> term = layer_loss(head, labels);
    out.per_layer.push_back(double(term.value()(0, 0)));
    sum = ad::add(sum, term);
  }
  out.total = ad::scale(sum, T(1) / T(heads.size()));
  return out;
}

template <typename T>
Decisions decisions(const Matrix<T>& log_p, double tau) {
  Decisions d{std::vector<std::int64_t>(log_p.rows(), kUnmatched), std::vector<std::int64_t>(log_p.cols(), kUnmatched)};
  for (const Match& m : extract_matches(log_p, tau)) {
    d.a[m.a] = std::int64_t(m.b);
    d.b[m.b] = std::int64_t(m.a);
  }
  return d;
}

std::vector<double> agreement_labels(const Decisions& layer, const Decisions& last) {
  require(layer.a.size() == last.a.size() && layer.b.size() == last.b.size(), "agreement_labels: size mismatch");
  std::vector<double> out;
  out.reserve(layer.a.size() + layer.b.size());
  for (std::size_t i = 0; i < layer.a.size(); ++i) out.push_back(layer.a[i] == last.a[i] ? 1.0 : 0.0);
  for (std::size_t j = 0; j < layer.b.size(); ++j) out.push_back(layer.b[j] == last.b[j] ? 1.0 : 0.0);
  return out;
}

template <typename T>
Var<T> classifier_loss(const DeepPass<T>& pass, std::span<const Linear<Var<T>>> classifiers, double tau) {
  const std::size_t layers = pass.heads.size();
  require(layers >= 2 && classifiers.size() + 1 == layers, "classifier_loss: need L-1 classifiers");
  const Decisions last = decisions(pass.heads.back().log_p.value(), tau);
  Var<T> sum(Matrix<T>(1, 1));
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    const Decisions here = decisions(pass.heads[l].log_p.value(), tau);
    const std::vector<double> labels = agreement_labels(here, last);
    const std::size_t m = here.a.size(), n = here.b.size();
    if (m + n == 0) continue;
    // Mean over the points of both images.
    const std::vector<T> target(labels.begin(), labels.end());
    const auto side = [&](const Var<T>& states, std::size_t offset, std::size_t count) {
      const Var<T> logits = apply_linear(ad::detach(states), classifiers[l]);
      const std::span<const T> y(target.data() + offset, count);
      return ad::scale(ad::bce_with_logits(logits, y), T(count) / T(m + n));
    };
    if (m > 0) sum = ad::add(sum, side(pass.states_a[l], 0, m));
    if (n > 0) sum = ad::add(sum, side(pass.states_b[l], m, n));
  }
  return ad::scale(sum, T(1) / T(layers - 1));
}

#define GLOW_INSTANTIATE(T)                                                                             \
  template Var<T> layer_loss(const Assignment<T>&, const RowLabels&);                                   \
  template std::optional<AssignmentLoss<T>> assignment_loss(std::span<const Assignment<T>>, const RowLabels&); \
  template Decisions decisions(const Matrix<T>&, double);                                               \
  template Var<T> classifier_loss(const DeepPass<T>&, std::span<const Linear<Var<T>>>, double);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

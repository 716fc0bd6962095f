// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_MODEL_HEAD_HPP_
#define GLOW_MODEL_HEAD_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glow/model/params.hpp"

namespace glow {

/// Head output for the active rows of both images.
template <typename T>
struct Assignment {
  Var<T> scores;         // M x N pairwise similarity
  Var<T> logit_a;        // M x 1, matchability before the sigmoid
  Var<T> logit_b;        // N x 1
  Var<T> log_p;          // M x N log soft assignment
};

/// S = proj(x_a) proj(x_b)^T and sigma = sigmoid(w . x + b).
template <typename T>
Assignment<T> assign(const Var<T>& x_a, const Var<T>& x_b, const HeadParams<Var<T>>& head);

/// Matchability logits only (used by pruning).
template <typename T>
Var<T> matchability_logits(const Var<T>& x, const HeadParams<Var<T>>& head);

/// Plain-value form of the assignment: log P from scores and matchabilities
/// in [0, 1]. Zero matchability gives -inf entries.
template <typename T>
Matrix<T> log_assignment(const Matrix<T>& scores, std::span<const T> sigma_a, std::span<const T> sigma_b);

struct Match {
  std::size_t a = 0;
  std::size_t b = 0;
  double score = 0;  // P_ab
  friend bool operator==(const Match&, const Match&) = default;
};

/// Pairs whose P is above tau and is the unique maximum of both its row and
/// its column. Sorted by row. Exact ties produce no pair.
template <typename T>
std::vector<Match> extract_matches(const Matrix<T>& log_p, double tau);

inline constexpr std::int64_t kUnmatched = -1;

struct MatchResult {
  std::vector<Match> pairs;             // original point numbering, sorted by a
  std::vector<std::int64_t> match_a;    // partner in B or kUnmatched, per point of A
  std::vector<std::int64_t> match_b;
  std::vector<double> matchability_a;   // at the exit layer, or when pruned
  std::vector<double> matchability_b;
  std::size_t exit_layer = 0;           // 1-based layer whose head produced the pairs
  std::vector<std::size_t> active_a;    // active points entering each executed layer
  std::vector<std::size_t> active_b;
  std::size_t pruned_a = 0;
  std::size_t pruned_b = 0;

  double pruned_fraction() const;
  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Text form: a '#' header with the exit layer and counts, then one
/// "i j score" line per pair.
std::string format_matches(const MatchResult& r);
/// JSON form with every field, for the evaluator.
std::string matches_to_json(const MatchResult& r);
MatchResult matches_from_json(const std::string& text);

void write_matches(const MatchResult& r, const std::filesystem::path& text_path,
                   const std::optional<std::filesystem::path>& json_path);
MatchResult read_matches_json(const std::filesystem::path& path);

}  // namespace glow

#endif  // GLOW_MODEL_HEAD_HPP_

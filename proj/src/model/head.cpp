// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/model/head.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "glow/io/binary.hpp"
#include "glow/num/flops.hpp"
#include "glow/num/kernels.hpp"

namespace glow {

template <typename T>
Assignment<T> assign(const Var<T>& x_a, const Var<T>& x_b, const HeadParams<Var<T>>& head) {
  PhaseScope phase(Phase::kHead);
  Assignment<T> out;
  const Var<T> pa = apply_linear(x_a, head.projection);
  const Var<T> pb = apply_linear(x_b, head.projection);
  out.scores = ad::matmul_nt(pa, pb);
  out.logit_a = apply_linear(x_a, head.matchability);
  out.logit_b = apply_linear(x_b, head.matchability);
  out.log_p = ad::log_assignment(out.scores, out.logit_a, out.logit_b);
  return out;
}

template <typename T>
Var<T> matchability_logits(const Var<T>& x, const HeadParams<Var<T>>& head) {
  return apply_linear(x, head.matchability);
}

template <typename T>
Matrix<T> log_assignment(const Matrix<T>& scores, std::span<const T> sigma_a, std::span<const T> sigma_b) {
  require(sigma_a.size() == scores.rows() && sigma_b.size() == scores.cols(),
          "log_assignment: one matchability per row and column required");
  const Matrix<T> lr = log_softmax_rows(scores);
  const Matrix<T> lc = log_softmax_cols(scores);
  Matrix<T> out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t j = 0; j < scores.cols(); ++j)
      out(i, j) = std::log(sigma_a[i]) + std::log(sigma_b[j]) + lc(i, j) + lr(i, j);
  return out;
}

template <typename T>
std::vector<Match> extract_matches(const Matrix<T>& log_p, double tau) {
  const std::size_t m = log_p.rows(), n = log_p.cols();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  // Unique argmax per row and per column; kNone when the maximum is tied.
  std::vector<std::size_t> row_best(m, kNone), col_best(n, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    T best = -std::numeric_limits<T>::infinity();
    bool tied = false;
    for (std::size_t j = 0; j < n; ++j) {
      const T v = log_p(i, j);
      if (v > best) {
        best = v;
        row_best[i] = j;
        tied = false;
      } else if (v == best) {
        tied = true;
      }
    }
    if (tied) row_best[i] = kNone;
  }
  for (std::size_t j = 0; j < n; ++j) {
    T best = -std::numeric_limits<T>::infinity();
    bool tied = false;
    for (std::size_t i = 0; i < m; ++i) {
      const T v = log_p(i, j);
      if (v > best) {
        best = v;
        col_best[j] = i;
        tied = false;
      } else if (v == best) {
        tied = true;
      }
    }
    if (tied) col_best[j] = kNone;
  }
  std::vector<Match> out;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = row_best[i];
    if (j == kNone || col_best[j] != i) continue;
    const double p = std::exp(double(log_p(i, j)));
    if (p > tau) out.push_back({i, j, p});
  }
  return out;
}

double MatchResult::pruned_fraction() const {
  const std::size_t total = match_a.size() + match_b.size();
  return total == 0 ? 0.0 : double(pruned_a + pruned_b) / double(total);
}

std::string format_matches(const MatchResult& r) {
  std::string out = fmt::format("# exit_layer {} points_a {} points_b {} matches {} pruned_a {} pruned_b {}\n",
                                r.exit_layer, r.match_a.size(), r.match_b.size(), r.pairs.size(),
                                r.pruned_a, r.pruned_b);
  for (const Match& m : r.pairs) out += fmt::format("{} {} {:.9g}\n", m.a, m.b, m.score);
  return out;
}

std::string matches_to_json(const MatchResult& r) {
  nlohmann::json j;
  j["exit_layer"] = r.exit_layer;
  nlohmann::json pairs = nlohmann::json::array();
  for (const Match& m : r.pairs) pairs.push_back({m.a, m.b, m.score});
  j["pairs"] = std::move(pairs);
  j["match_a"] = r.match_a;
  j["match_b"] = r.match_b;
  j["matchability_a"] = r.matchability_a;
  j["matchability_b"] = r.matchability_b;
  j["active_a"] = r.active_a;
  j["active_b"] = r.active_b;
  j["pruned_a"] = r.pruned_a;
  j["pruned_b"] = r.pruned_b;
  return j.dump(1) + "\n";
}

MatchResult matches_from_json(const std::string& text) {
  MatchResult r;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    r.exit_layer = j.at("exit_layer").get<std::size_t>();
    for (const auto& p : j.at("pairs"))
      r.pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>(), p.at(2).get<double>()});
    r.match_a = j.at("match_a").get<std::vector<std::int64_t>>();
    r.match_b = j.at("match_b").get<std::vector<std::int64_t>>();
    r.matchability_a = j.at("matchability_a").get<std::vector<double>>();
    r.matchability_b = j.at("matchability_b").get<std::vector<double>>();
    r.active_a = j.at("active_a").get<std::vector<std::size_t>>();
    r.active_b = j.at("active_b").get<std::vector<std::size_t>>();
    r.pruned_a = j.at("pruned_a").get<std::size_t>();
    r.pruned_b = j.at("pruned_b").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("match file: ") + e.what());
  }
  return r;
}

void write_matches(const MatchResult& r, const std::filesystem::path& text_path,
                   const std::optional<std::filesystem::path>& json_path) {
  write_text_atomic(text_path, format_matches(r));
  if (json_path) write_text_atomic(*json_path, matches_to_json(r));
}

MatchResult read_matches_json(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return matches_from_json(std::string(bytes.begin(), bytes.end()));
}

#define GLOW_INSTANTIATE(T)                                                                    \
  template Assignment<T> assign(const Var<T>&, const Var<T>&, const HeadParams<Var<T>>&);     \
  template Var<T> matchability_logits(const Var<T>&, const HeadParams<Var<T>>&);              \
  template Matrix<T> log_assignment(const Matrix<T>&, std::span<const T>, std::span<const T>); \
  template std::vector<Match> extract_matches(const Matrix<T>&, double);

GLOW_INSTANTIATE(float)
GLOW_INSTANTIATE(double)

#undef GLOW_INSTANTIATE

}  // namespace glow

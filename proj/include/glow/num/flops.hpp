// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_NUM_FLOPS_HPP_
#define GLOW_NUM_FLOPS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace glow {

// Multiply-accumulate accounting, grouped by the part of the network that
// issued the work. Attention phases hold only the point-by-point kernels
// (scores and weighted sums), so they scale quadratically with point count.
enum class Phase : std::size_t {
  kProjection = 0,   // input projection, q/k/v and merge linear maps
  kSelfAttention,    // rotated q.k scores and value aggregation
  kCrossSimilarity,  // key-key similarity between the two images
  kCrossAttention,   // cross-image value aggregation, both directions
  kUpdate,           // update MLPs
  kHead,             // assignment head
  kClassifier,       // confidences + pruning matchability (adaptivity overhead)
  kOther,
  kCount,
};

std::string_view phase_name(Phase p);

class FlopCounter {
 public:
  void add(Phase phase, std::uint64_t macs) { macs_[static_cast<std::size_t>(phase)] += macs; }
  std::uint64_t of(Phase phase) const { return macs_[static_cast<std::size_t>(phase)]; }
  std::uint64_t total() const;
  /// Self-attention + cross-similarity + cross-attention.
  std::uint64_t attention() const;
  void reset() { macs_.fill(0); }

 private:
  std::array<std::uint64_t, static_cast<std::size_t>(Phase::kCount)> macs_{};
};

/// Routes counted kernels on this thread into `counter` for the scope's
/// lifetime. Nested scopes restore the previous counter on exit.
class FlopScope {
 public:
  explicit FlopScope(FlopCounter* counter);
  ~FlopScope();
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  FlopCounter* previous_;
};

/// Labels work issued on this thread with `phase` for the scope's lifetime.
class PhaseScope {
 public:
  explicit PhaseScope(Phase phase);
  ~PhaseScope();
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Phase previous_;
};

/// Adds `macs` to the active counter under the active phase, if any.
void count_macs(std::uint64_t macs);

}  // namespace glow

#endif  // GLOW_NUM_FLOPS_HPP_

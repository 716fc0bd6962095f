// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/num/flops.hpp"

namespace glow {
namespace {

thread_local FlopCounter* g_counter = nullptr;
thread_local Phase g_phase = Phase::kOther;

}  // namespace

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::kProjection: return "projection";
    case Phase::kSelfAttention: return "self_attention";
    case Phase::kCrossSimilarity: return "cross_similarity";
    case Phase::kCrossAttention: return "cross_attention";
    case Phase::kUpdate: return "update";
    case Phase::kHead: return "head";
    case Phase::kClassifier: return "classifier";
    case Phase::kOther: return "other";
    case Phase::kCount: break;
  }
  return "invalid";
}

std::uint64_t FlopCounter::total() const {
  std::uint64_t sum = 0;
  for (auto v : macs_) sum += v;
  return sum;
}

std::uint64_t FlopCounter::attention() const {
  return of(Phase::kSelfAttention) + of(Phase::kCrossSimilarity) + of(Phase::kCrossAttention);
}

FlopScope::FlopScope(FlopCounter* counter) : previous_(g_counter) { g_counter = counter; }
FlopScope::~FlopScope() { g_counter = previous_; }

PhaseScope::PhaseScope(Phase phase) : previous_(g_phase) { g_phase = phase; }
PhaseScope::~PhaseScope() { g_phase = previous_; }

void count_macs(std::uint64_t macs) {
  if (g_counter != nullptr) g_counter->add(g_phase, macs);
}

}  // namespace glow

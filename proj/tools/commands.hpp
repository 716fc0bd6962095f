// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TOOLS_COMMANDS_HPP_
#define GLOW_TOOLS_COMMANDS_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace glow::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;    // bad flags, config, or input files
inline constexpr int kExitRuntimeError = 3;  // divergence, failed checks, anything else

/// A self-check of a command failed (for example the bench scaling check).
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset manifest: '#' comment lines, then one line per pair,
// "name a_features b_features ground_truth", paths relative to the manifest
// directory. "-" marks missing ground truth.
struct ManifestEntry {
  std::string name;
  std::filesystem::path a, b, gt;  // resolved
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> schema;
  void (*run)(const RunConfig&);
};

const std::vector<Command>& commands();

}  // namespace glow::cli

#endif  // GLOW_TOOLS_COMMANDS_HPP_

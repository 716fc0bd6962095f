// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_TOOLS_RUN_CONFIG_HPP_
#define GLOW_TOOLS_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace glow::cli {

struct KeySpec {
  std::string key;
  std::string default_value;  // empty means "not set"
  std::string help;
  bool flag = false;          // boolean switch on the command line
};

/// Flat key=value settings of one command. Values come from the schema
/// defaults, then the config file, then GLOW_SEED, then command-line flags.
class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> schema);

  const std::vector<KeySpec>& schema() const { return schema_; }

  /// Reads `key = value` lines; '#' starts a comment. Unknown keys and
  /// malformed lines throw InvalidInput.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& origin);
  /// Applies the GLOW_SEED environment variable to the "seed" key, if any.
  void apply_seed_env();
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<std::uint64_t> u64_list(const std::string& key) const;

  /// Every key in schema order, as a loadable config file.
  std::string resolved() const;

 private:
  const KeySpec& spec(const std::string& key) const;

  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
};

}  // namespace glow::cli

#endif  // GLOW_TOOLS_RUN_CONFIG_HPP_

// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "glow/io/binary.hpp"
#include "glow/num/matrix.hpp"

namespace glow::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

RunConfig::RunConfig(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
  for (const KeySpec& k : schema_)
    if (!k.default_value.empty()) values_[k.key] = k.default_value;
}

const KeySpec& RunConfig::spec(const std::string& key) const {
  const auto it = std::find_if(schema_.begin(), schema_.end(), [&](const KeySpec& k) { return k.key == key; });
  if (it == schema_.end()) throw InvalidInput("config: unknown key '" + key + "'");
  return *it;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  load_text(std::string(bytes.begin(), bytes.end()), path.string());
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput(origin + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    try {
      set(key, trim(std::string_view(line).substr(eq + 1)));
    } catch (const InvalidInput& e) {
      throw InvalidInput(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::apply_seed_env() {
  const char* env = std::getenv("GLOW_SEED");
  if (env == nullptr || !std::any_of(schema_.begin(), schema_.end(), [](const KeySpec& k) { return k.key == "seed"; }))
    return;
  set("seed", env);
  u64("seed");  // validate now
}

void RunConfig::set(const std::string& key, const std::string& value) {
  spec(key);
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  spec(key);
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::str(const std::string& key) const {
  if (!has(key)) throw InvalidInput("config: '" + key + "' is required");
  return values_.at(key);
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& s = str(key);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw InvalidInput("config: '" + key + "' must be a non-negative integer, got '" + s + "'");
  return v;
}

double RunConfig::real(const std::string& key) const {
  const std::string& s = str(key);
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw InvalidInput("config: '" + key + "' must be a number, got '" + s + "'");
  return v;
}

bool RunConfig::boolean(const std::string& key) const {
  if (!has(key)) return false;
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidInput("config: '" + key + "' must be true or false, got '" + s + "'");
}

std::vector<std::uint64_t> RunConfig::u64_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  std::istringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || end != item.data() + item.size())
      throw InvalidInput("config: '" + key + "' must be a comma-separated list of integers");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const KeySpec& k : schema_) {
    const auto it = values_.find(k.key);
    out += k.key + " = " + (it == values_.end() ? std::string() : it->second) + "\n";
  }
  return out;
}

}  // namespace glow::cli

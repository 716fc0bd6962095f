// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// glow: synthetic data generation, training, matching, evaluation and
// FLOP benchmarks. Exit codes: 0 success, 2 input error, 3 runtime failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <map>
#include <memory>

#include "commands.hpp"
#include "glow/io/binary.hpp"
#include "glow/train/trainer.hpp"

namespace {

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

struct Bindings {
  std::string config_file;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace glow::cli;
  spdlog::set_default_logger(spdlog::stderr_color_st("glow"));

  CLI::App app{"glow: sparse feature matching with adaptive depth and width"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn or error");

  std::map<std::string, std::unique_ptr<Bindings>> bindings;
  for (const Command& command : commands()) {
    CLI::App* sub = app.add_subcommand(command.name, command.help);
    auto& b = *(bindings[command.name] = std::make_unique<Bindings>());
    sub->add_option("--config", b.config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const KeySpec& k : command.schema) {
      std::string help = k.help;
      if (!k.default_value.empty()) help += " [" + k.default_value + "]";
      if (k.flag)
        b.options[k.key] = sub->add_flag("--" + dashed(k.key), b.flags[k.key], help);
      else
        b.options[k.key] = sub->add_option("--" + dashed(k.key), b.values[k.key], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  for (const Command& command : commands()) {
    if (!app.got_subcommand(command.name)) continue;
    const Bindings& b = *bindings.at(command.name);
    try {
      RunConfig config(command.schema);
      if (!b.config_file.empty()) config.load_file(b.config_file);
      config.apply_seed_env();
      for (const KeySpec& k : command.schema) {
        if (b.options.at(k.key)->count() == 0) continue;
        config.set(k.key, k.flag ? (b.flags.at(k.key) ? "true" : "false") : b.values.at(k.key));
      }
      spdlog::info("glow {} with resolved config:\n{}", command.name, config.resolved());
      command.run(config);
      return kExitOk;
    } catch (const glow::InvalidInput& e) {
      spdlog::error("{}", e.what());
      return kExitInputError;
    } catch (const glow::IoError& e) {
      spdlog::error("{}", e.what());
      return kExitInputError;
    } catch (const std::filesystem::filesystem_error& e) {
      spdlog::error("{}", e.what());
      return kExitInputError;
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return kExitRuntimeError;
    }
  }
  return kExitInputError;
}

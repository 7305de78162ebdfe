#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

namespace shadowkit::cli {

using json = nlohmann::ordered_json;

/// Contract or usage problem; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = 42;
  std::string config_path;
  bool quiet = false;
  /// Fully resolved configuration of the running command.
  json config;
  /// Command bodies by subcommand name, run after parsing.
  std::map<std::string, std::function<void()>> handlers;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void log(const std::string& line) const;
};

void add_data_commands(CLI::App& app, Context& ctx);
void add_train_commands(CLI::App& app, Context& ctx);
void add_eval_commands(CLI::App& app, Context& ctx);

/// RunManifest: tool, version, timestamp, config, dataset hashes, history,
/// final metrics and duration, written atomically.
json run_manifest(const Context& ctx, json datasets, json history, json metrics);
void write_manifest(const std::filesystem::path& path, const json& manifest);

std::string tool_version();

}  // namespace shadowkit::cli

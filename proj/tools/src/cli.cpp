#include "shadowkit/cli/cli.hpp"

#include <ctime>
#include <iostream>
#include <set>

#include "commands.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/fileio.hpp"

namespace shadowkit::cli {

std::string tool_version() { return "0.1.0"; }

void Context::log(const std::string& line) const {
  if (!quiet) err << line << '\n';
}

json run_manifest(const Context& ctx, json datasets, json history, json metrics) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
  json m;
  m["tool"] = "shadowkit";
  m["version"] = tool_version();
  m["timestamp"] = stamp;
  m["config"] = ctx.config;
  m["datasets"] = std::move(datasets);
  m["history"] = std::move(history);
  m["metrics"] = std::move(metrics);
  m["duration_s"] = secs;
  return m;
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
  write_file_atomic(path, manifest.dump(2) + "\n");
}

namespace {

bool is_option_token(const std::string& t) { return t.size() > 1 && t[0] == '-'; }

// Finds the value of --config in raw arguments.
std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

json load_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": malformed JSON: " + e.what());
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  // A RunManifest carries its resolved configuration under "config".
  if (doc.is_object() && doc.contains("tool") && doc.contains("config")) doc = doc["config"];
  if (!doc.is_object()) throw UsageError("config " + path + ": expected a JSON object");
  return doc;
}

// Turns config-file entries into command-line tokens placed right after the
// subcommand, so explicit flags that follow take precedence.
std::vector<std::string> config_tokens(const json& cfg, CLI::App& sub, const std::string& path) {
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || key == "config") continue;
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (!opt && key != "seed" && key != "quiet") {
      throw UsageError("config " + path + ": unknown key '" + key + "' for command " + sub.get_name());
    }
    if (value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
      continue;
    }
    if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else {
      throw UsageError("config " + path + ": key '" + key + "' must be a string, number or boolean");
    }
  }
  return tokens;
}

// Numbers and booleans as JSON scalars, everything else as strings.
json typed_value(const std::string& text) {
  const json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && (parsed.is_number() || parsed.is_boolean())) return parsed;
  return text;
}

json resolved_config(const CLI::App& sub, const Context& ctx) {
  json cfg;
  cfg["command"] = sub.get_name();
  cfg["seed"] = ctx.seed;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || opt->get_lnames().empty()) continue;
    if (opt->get_expected_min() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      cfg[name] = typed_value(opt->results().back());
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = typed_value(opt->get_default_str());
    } else {
      cfg[name] = nullptr;
    }
  }
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"shadowkit: shadow detection toolkit for agro-photovoltaic scenes", "shadowkit"};
  app.require_subcommand(0, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--seed", ctx.seed, "Random seed")->capture_default_str();
  app.add_option("--config", ctx.config_path, "JSON config file or run manifest");
  app.add_flag("--quiet", ctx.quiet, "Suppress progress output");

  add_data_commands(app, ctx);
  add_train_commands(app, ctx);
  add_eval_commands(app, ctx);
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> args = args_in;
    const std::string cfg_path = find_config(args);
    if (!cfg_path.empty()) {
      const json cfg = load_config(cfg_path);
      std::size_t pos = args.size();
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (!is_option_token(args[i]) && app.get_subcommand_no_throw(args[i])) {
          pos = i;
          break;
        }
      }
      std::string command;
      if (pos < args.size()) command = args[pos];
      if (cfg.contains("command")) {
        const auto wanted = cfg["command"].get<std::string>();
        if (command.empty()) {
          args.push_back(wanted);
          pos = args.size() - 1;
          command = wanted;
        } else if (wanted != command) {
          throw UsageError("config " + cfg_path + " is for command " + wanted + ", not " + command);
        }
      }
      if (command.empty()) throw UsageError("config " + cfg_path + ": no command to run");
      const auto tokens = config_tokens(cfg, *app.get_subcommand(command), cfg_path);
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, tokens.begin(), tokens.end());
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out, err);
      return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
      app.exit(e, out, err);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return kExitUsage;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      err << app.help();
      return kExitUsage;
    }
    ctx.config = resolved_config(*chosen.front(), ctx);
    ctx.handlers.at(chosen.front()->get_name())();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace shadowkit::cli

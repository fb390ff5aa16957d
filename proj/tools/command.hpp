#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace lasrl::cli {

using nlohmann::json;

/// One configuration key. Its default fixes the type; every key can come
/// from the JSON config file or from the flag `--<key>` (underscores become
/// dashes), and flags win.
struct Option {
  std::string key;
  json fallback;
  std::string help;
};

/// What a subcommand sees while it runs: the resolved configuration and
/// the output directory. Files created through artifact() get checksummed
/// into the manifest.
class RunContext {
 public:
  RunContext(json config, std::filesystem::path out) : config_(std::move(config)), out_(std::move(out)) {}

  const json& config() const { return config_; }
  const std::filesystem::path& out() const { return out_; }

  std::filesystem::path artifact(const std::string& name);
  const std::vector<std::string>& artifacts() const { return artifacts_; }

  template <class T>
  T get(const std::string& key) const {
    return config_.at(key).get<T>();
  }
  std::size_t size(const std::string& key) const { return get<std::size_t>(key); }
  std::uint64_t seed() const { return get<std::uint64_t>("seed"); }
  double real(const std::string& key) const { return get<double>(key); }
  bool flag(const std::string& key) const { return get<bool>(key); }
  std::string text(const std::string& key) const { return get<std::string>(key); }
  // ConfigError naming the key when it is empty.
  std::string required_path(const std::string& key) const;

 private:
  json config_;
  std::filesystem::path out_;
  std::vector<std::string> artifacts_;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Option> options;
  // Returns the exit status; failures that are not the user's fault throw.
  std::function<int(RunContext&)> run;
  std::string positional;  // key filled from a positional argument, if any
  std::vector<std::string> choices;  // allowed positional values
};

std::vector<Command> bandit_commands();
std::vector<Command> seq_commands();
std::vector<Command> analysis_commands();
std::vector<Command> reproduce_commands();

/// Comma separated list, empty items dropped.
std::vector<std::string> split_list(const std::string& text);

}  // namespace lasrl::cli

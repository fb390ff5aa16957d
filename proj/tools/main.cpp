// lasrl: command-line runner for the bandit simulations, the
// micro-translation pipeline, the analyses and the lemma checks.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "command.hpp"
#include "lasrl/digest.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/parallel.hpp"

#ifndef LASRL_VERSION
#define LASRL_VERSION "0.0.0"
#endif

namespace lasrl::cli {

namespace {

constexpr int kFormatVersion = 1;

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string type_name(const json& fallback) {
  if (fallback.is_boolean()) return "a boolean";
  if (fallback.is_number_unsigned()) return "a non-negative integer";
  if (fallback.is_number()) return "a number";
  return "a string";
}

// Value from the config file, checked against the default's type.
json coerce_json(const Option& opt, const json& value) {
  const json& d = opt.fallback;
  const bool ok = (d.is_boolean() && value.is_boolean()) ||
                  (d.is_number_unsigned() && value.is_number_unsigned()) ||
                  (d.is_number_float() && value.is_number()) || (d.is_string() && value.is_string());
  if (!ok) {
    throw ConfigError("config key '" + opt.key + "' expects " + type_name(d));
  }
  return d.is_number_float() ? json(value.get<double>()) : value;
}

json coerce_text(const Option& opt, const std::string& text) {
  const json& d = opt.fallback;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (d.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
  } else if (d.is_number_unsigned()) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec == std::errc() && res.ptr == last && !text.empty()) return v;
  } else if (d.is_number_float()) {
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec == std::errc() && res.ptr == last && !text.empty()) return v;
  } else {
    return text;
  }
  throw ConfigError("flag " + flag_name(opt.key) + " expects " + type_name(d) + ", got '" + text + "'");
}

std::vector<Option> with_common(std::vector<Option> options) {
  options.push_back({"format_version", json(std::uint64_t{kFormatVersion}), "configuration format version"});
  return options;
}

json resolve(const Command& cmd, const std::string& config_path, const std::map<std::string, std::string>& flags,
             const CLI::App& sub) {
  const auto options = with_common(cmd.options);
  json resolved = json::object();
  for (const auto& opt : options) {
    resolved[opt.key] = opt.fallback;
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      throw ConfigError("cannot read config file " + config_path);
    }
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) {
      throw ConfigError("config file " + config_path + " must hold a JSON object");
    }
    for (const auto& [key, value] : file.items()) {
      const auto it = std::find_if(options.begin(), options.end(), [&](const Option& o) { return o.key == key; });
      if (it == options.end()) {
        throw ConfigError("unknown config key '" + key + "'");
      }
      resolved[key] = coerce_json(*it, value);
    }
  }
  for (const auto& opt : options) {
    const std::string name = opt.key == cmd.positional ? opt.key : flag_name(opt.key);
    if (sub.count(name) > 0) {
      resolved[opt.key] = coerce_text(opt, flags.at(opt.key));
    }
  }
  if (resolved.at("format_version").get<std::uint64_t>() != kFormatVersion) {
    throw ConfigError("unsupported format_version " + resolved.at("format_version").dump());
  }
  return resolved;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

// The manifest holds only reproducible facts; wall-clock time goes to
// timing.json so identical runs produce identical manifests.
void write_manifest(const Command& cmd, const RunContext& ctx, const std::string& config_text) {
  json artifacts = json::object();
  for (const auto& name : ctx.artifacts()) {
    artifacts[name] = sha256_file(ctx.out() / name);
  }
  json manifest{{"format_version", kFormatVersion},
                {"code_version", LASRL_VERSION},
                {"command", cmd.name},
                {"config_digest", sha256_hex(config_text)},
                {"artifacts", artifacts}};
  write_text(ctx.out() / "manifest.json", manifest.dump(2) + "\n");
}

int run_command(const Command& cmd, json config, const std::filesystem::path& out) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  RunContext ctx(std::move(config), out);
  const std::string config_text = ctx.config().dump(2) + "\n";
  write_text(ctx.artifact("config.resolved.json"), config_text);
  const int status = cmd.run(ctx);
  write_manifest(cmd, ctx, config_text);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json timing{{"wall_seconds", seconds}, {"threads", thread_count()}};
  write_text(out / "timing.json", timing.dump(2) + "\n");
  return status;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int fail(const char* kind, const std::string& what, int code) {
  std::cerr << "lasrl: error: " << kind << ": " << one_line(what) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Command> commands;
  for (auto group : {bandit_commands, seq_commands, analysis_commands, reproduce_commands}) {
    for (auto& c : group()) {
      commands.push_back(std::move(c));
    }
  }

  CLI::App app{"Large action spaces in RL-trained text generation: simulations, training and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LASRL_VERSION);

  struct Slot {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::string out;
    std::map<std::string, std::string> flags;
  };
  std::vector<Slot> slots(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const Command& cmd = commands[i];
    Slot& slot = slots[i];
    slot.sub = app.add_subcommand(cmd.name, cmd.help);
    slot.sub->add_option("--config", slot.config_path, "JSON configuration file (flags override it)");
    slot.out = "lasrl-out/" + cmd.name;
    slot.sub->add_option("--out", slot.out, "output directory")->capture_default_str();
    for (const auto& opt : with_common(cmd.options)) {
      std::string& target = slot.flags[opt.key];
      const std::string def = opt.fallback.is_string() ? opt.fallback.get<std::string>() : opt.fallback.dump();
      if (opt.key == cmd.positional) {
        auto* o = slot.sub->add_option(opt.key, target, opt.help);
        if (!cmd.choices.empty()) {
          o->check(CLI::IsMember(cmd.choices));
        }
      } else {
        slot.sub->add_option(flag_name(opt.key), target, opt.help + " [" + def + "]");
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!slots[i].sub->parsed()) {
      continue;
    }
    const Command& cmd = commands[i];
    json config;
    try {
      config = resolve(cmd, slots[i].config_path, slots[i].flags, *slots[i].sub);
    } catch (const ConfigError& e) {
      return fail("config", e.what(), 2);
    }
    try {
      return run_command(cmd, std::move(config), slots[i].out);
    } catch (const ConfigError& e) {
      return fail("config", e.what(), 2);
    } catch (const ParseError& e) {
      return fail("parse", e.what(), 2);
    } catch (const IndexError& e) {
      return fail("input", e.what(), 2);
    } catch (const FixtureError& e) {
      return fail("fixture", e.what(), 2);
    } catch (const Error& e) {
      return fail("runtime", e.what(), 1);
    } catch (const std::exception& e) {
      return fail("runtime", e.what(), 1);
    }
  }
  return fail("usage", "no subcommand given", 2);
}

}  // namespace lasrl::cli

int main(int argc, char** argv) { return lasrl::cli::main(argc, argv); }

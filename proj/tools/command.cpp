#include "command.hpp"

#include <sstream>

#include "lasrl/errors.hpp"

namespace lasrl::cli {

std::filesystem::path RunContext::artifact(const std::string& name) {
  artifacts_.push_back(name);
  return out_ / name;
}

std::string RunContext::required_path(const std::string& key) const {
  std::string v = text(key);
  if (v.empty()) {
    throw ConfigError("config key '" + key + "' is required");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

}  // namespace lasrl::cli

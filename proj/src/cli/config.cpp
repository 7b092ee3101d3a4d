#include <algorithm>

#include "json.hpp"
#include "sedsep/cli.hpp"
#include "sedsep/error.hpp"
#include "sedsep/text_io.hpp"

namespace sedsep::cli {

namespace {

std::string scalar_to_string(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  raise(errc::kBadConfig, "config key '" + key + "' has an unsupported value type");
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& known) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) raise(errc::kUsage, "--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;

  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(read_text_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    raise(errc::kBadConfig, config_path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) raise(errc::kBadConfig, config_path + ": config must be a JSON object");

  std::vector<std::string> expanded;
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      raise(errc::kBadConfig, config_path + ": unknown config key '" + key + "'");
    }
    if (value.is_boolean()) {
      expanded.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += scalar_to_string(v, key);
      }
      expanded.push_back("--" + key);
      expanded.push_back(joined);
    } else {
      expanded.push_back("--" + key);
      expanded.push_back(scalar_to_string(value, key));
    }
  }
  expanded.insert(expanded.end(), rest.begin(), rest.end());
  return expanded;
}

}  // namespace sedsep::cli

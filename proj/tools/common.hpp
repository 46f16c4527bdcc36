#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "tabadm/errors.hpp"

namespace tabadm::cli {

/// Shortest decimal string that round-trips the exact double.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + " is not valid JSON (" + e.what() + ")");
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw ConfigError("failed writing " + path);
}

/// "data/musk.csv" -> "musk"
inline std::string dataset_name(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base =
      slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base.resize(dot);
  return base;
}

}  // namespace tabadm::cli

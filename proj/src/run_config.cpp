#include "mogrpo/run_config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mogrpo {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("config: cannot open " + path);
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  return from_string(buffer.str(), path);
}

RunConfig RunConfig::from_string(const std::string& text,
                                 const std::string& origin) {
  RunConfig config;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config: unterminated section at " + origin +
                                 ":" + std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: expected key = value at " + origin +
                               ":" + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config: empty key at " + origin + ":" +
                               std::to_string(line_no));
    }
    config.values_[section.empty() ? key : section + "." + key] = value;
  }
  return config;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& text = it->second;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw std::runtime_error("config: '" + key + "' is not a number: " + text);
  }
  return value;
}

std::int64_t RunConfig::get_int(const std::string& key,
                                std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::int64_t value = 0;
  const std::string& text = it->second;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw std::runtime_error("config: '" + key + "' is not an integer: " + text);
  }
  return value;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "on") {
    return true;
  }
  if (it->second == "false" || it->second == "0" || it->second == "off") {
    return false;
  }
  throw std::runtime_error("config: '" + key + "' is not a boolean: " +
                           it->second);
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return {};
  std::vector<double> out;
  std::istringstream stream(it->second);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    double value = 0.0;
    const auto result =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
      throw std::runtime_error("config: '" + key + "' has a bad entry: " + token);
    }
    out.push_back(value);
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void RunConfig::merge(const RunConfig& overrides) {
  for (const auto& [key, value] : overrides.values_) {
    values_[key] = value;
  }
}

}  // namespace mogrpo

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mogrpo {

// Flat key = value configuration with [section] headers and # comments.
// Lookups take "section.key"; a value read from a later merge() overrides
// an earlier one.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text,
                               const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Comma-separated list of reals, e.g. "1,0.5,2".
  std::vector<double> get_doubles(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void merge(const RunConfig& overrides);

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mogrpo

#pragma once

#include <map>
#include <string>
#include <vector>

namespace mogrpo::csv {

// Shortest round-trip decimal form; locale-independent, so re-running a
// deterministic experiment rewrites byte-identical files.
std::string format_double(double value);

double parse_double(const std::string& token);

// Comma-separated UTF-8 table with a mandatory header row, preceded by one
// schema line of the form
//
//   #schema=<id>[,key=value...]
//
// The tags carry run-level annotations (environment name, ablation values)
// that are not per-row columns.
struct Table {
  std::string schema;
  std::map<std::string, std::string> tags;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if absent
};

class Writer {
 public:
  Writer(const std::string& path, const std::string& schema,
         const std::map<std::string, std::string>& tags = {});

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t column_count_ = 0;
  bool closed_ = false;
};

Table read_file(const std::string& path);

}  // namespace mogrpo::csv

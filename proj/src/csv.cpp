#include "mogrpo/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mogrpo::csv {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& token) {
  double value = 0.0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    throw std::runtime_error("csv: bad numeric field '" + token + "'");
  }
  return value;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::runtime_error("csv: missing column '" + name + "'");
}

Writer::Writer(const std::string& path, const std::string& schema,
               const std::map<std::string, std::string>& tags)
    : path_(path) {
  buffer_ = "#schema=" + schema;
  for (const auto& [key, value] : tags) {
    buffer_ += ',' + key + '=' + value;
  }
  buffer_ += '\n';
}

void Writer::header(const std::vector<std::string>& columns) {
  if (column_count_ != 0) throw std::logic_error("csv: header written twice");
  if (columns.empty()) throw std::invalid_argument("csv: empty header");
  column_count_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void Writer::row(const std::vector<std::string>& fields) {
  if (column_count_ == 0) throw std::logic_error("csv: header missing");
  if (fields.size() != column_count_) {
    throw std::invalid_argument("csv: row width does not match header");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += fields[i];
  }
  buffer_ += '\n';
}

void Writer::close() {
  if (closed_) return;
  std::ofstream file(path_, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("csv: cannot open " + path_);
  file << buffer_;
  if (!file) throw std::runtime_error("csv: write to " + path_ + " failed");
  closed_ = true;
}

Table read_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("csv: cannot open " + path);

  Table table;
  std::string line;
  if (!std::getline(file, line)) {
    throw std::runtime_error("csv: " + path + " is empty");
  }
  if (line.rfind("#schema=", 0) != 0) {
    throw std::runtime_error("csv: " + path + " has no schema line");
  }
  const std::vector<std::string> schema_parts = split(line.substr(8), ',');
  if (schema_parts.empty() || schema_parts.front().empty()) {
    throw std::runtime_error("csv: " + path + " has a malformed schema line");
  }
  table.schema = schema_parts.front();
  for (std::size_t i = 1; i < schema_parts.size(); ++i) {
    const auto eq = schema_parts[i].find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("csv: " + path + " has a malformed schema tag '" +
                               schema_parts[i] + "'");
    }
    table.tags[schema_parts[i].substr(0, eq)] = schema_parts[i].substr(eq + 1);
  }

  if (!std::getline(file, line)) {
    throw std::runtime_error("csv: " + path + " is missing the header row");
  }
  table.columns = split(line, ',');

  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != table.columns.size()) {
      throw std::runtime_error("csv: " + path + " row width mismatch");
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace mogrpo::csv

// Minimal CSV writing/reading: comma separator, header row, '.' decimals,
// UTF-8, LF line endings. Lines starting with '#' are header comments.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace jcas {

struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if missing
  bool has_column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

std::string format_double(double v);  // shortest round-trip-safe decimal

void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace jcas

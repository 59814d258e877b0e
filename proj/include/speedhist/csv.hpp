#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace speedhist::csv {

struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws LoadError when missing.
  [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Reads a delimited text file with a header row. Blank lines are skipped.
/// Every row must have as many fields as the header.
Table read(const std::string& path, char sep = ',');

std::vector<std::string> split(std::string_view line, char sep = ',');

double parse_double(std::string_view field, const std::string& path, std::size_t line);
std::int64_t parse_int(std::string_view field, const std::string& path, std::size_t line);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace speedhist::csv

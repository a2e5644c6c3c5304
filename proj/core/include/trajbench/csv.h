#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace trajbench::csv {

using Row = std::vector<std::string>;

// Minimal RFC 4180 subset: fields containing ',', '"' or newlines are
// quoted on write and unquoted on read.
std::string escape(std::string_view field);
std::string join(const Row& row);
Row split(std::string_view line);

struct Table {
  Row header;
  std::vector<Row> rows;

  // Index of a header column; -1 if absent.
  int column(std::string_view name) const;
};

Table read_table(const std::string& path);
Table parse_table(std::string_view text);
std::string format_table(const Table& table);
void write_table(const std::string& path, const Table& table);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace trajbench::csv

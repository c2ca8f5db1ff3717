#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace recsim::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the row starts
  std::vector<std::string> fields;
};

// RFC 4180 style: comma separated, double-quoted fields may contain commas,
// newlines and doubled quotes. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

std::string quote(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace recsim::csv

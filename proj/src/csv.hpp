#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mlnet::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped.
std::vector<Record> parse(std::string_view text);

std::string quote(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace mlnet::csv

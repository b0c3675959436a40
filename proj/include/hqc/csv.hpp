#pragma once

// Minimal RFC 4180 reader/writer: comma separator, double-quote quoting,
// embedded newlines inside quoted fields, CRLF or LF record terminators.

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hqc::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws ParseError on an
  /// unterminated quoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::vector<Record> read_all(std::istream& in);

bool needs_quoting(std::string_view field);
std::string quote(std::string_view field);
/// Join already-unquoted fields into one CSV line (without terminator).
std::string join(const std::vector<std::string>& fields);

}  // namespace hqc::csv

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel::csv {

using Record = std::vector<std::string>;

// Reads one comma-separated record. Fields may be double-quoted; quoted
// fields may hold commas, doubled quotes and line breaks. `line` is
// advanced by the number of physical lines consumed. Returns nullopt at end
// of input. Throws ParseError on an unterminated quote.
std::optional<Record> read_record(std::istream& in, std::size_t& line);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

void write_record(std::ostream& out, std::span<const std::string> fields);

// Header-checked reader: maps the header names to column indices.
class Table {
 public:
  // Throws ParseError when the header is missing or a required column is
  // absent.
  Table(std::istream& in, std::span<const std::string_view> required);

  // Next data row; blank lines are skipped. Throws ParseError on a row with
  // the wrong field count.
  std::optional<Record> next();

  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

}  // namespace sentinel::csv

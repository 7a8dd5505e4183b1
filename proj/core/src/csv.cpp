#include "sentinel/csv.hpp"

#include <algorithm>

#include "sentinel/errors.hpp"

namespace sentinel::csv {

std::optional<Record> read_record(std::istream& in, std::size_t& line) {
  std::string text;
  if (!std::getline(in, text)) return std::nullopt;
  ++line;
  const std::size_t start_line = line;

  Record rec;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == text.size()) {
      if (!quoted) break;
      std::string more;
      if (!std::getline(in, more)) throw ParseError(start_line, "unterminated quoted field");
      ++line;
      field.push_back('\n');
      text = std::move(more);
      i = 0;
      continue;
    }
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == text.size()) {
      // tolerate CRLF
    } else {
      field.push_back(c);
    }
    ++i;
  }
  rec.push_back(std::move(field));
  return rec;
}

std::string escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

Table::Table(std::istream& in, std::span<const std::string_view> required) : in_(in) {
  auto header = read_record(in_, line_);
  if (!header) throw ParseError(1, "missing header line");
  header_ = std::move(*header);
  for (auto& h : header_) {
    h.erase(0, h.find_first_not_of(' '));
    h.erase(h.find_last_not_of(' ') + 1);
  }
  for (auto name : required) {
    if (!has_column(name)) {
      throw ParseError(1, "header is missing column '" + std::string(name) + "'");
    }
  }
}

std::optional<Record> Table::next() {
  while (true) {
    auto rec = read_record(in_, line_);
    if (!rec) return std::nullopt;
    if (rec->size() == 1 && rec->front().empty()) continue;
    if (rec->size() != header_.size()) {
      throw ParseError(line_, "expected " + std::to_string(header_.size()) + " fields, got " +
                                  std::to_string(rec->size()));
    }
    return rec;
  }
}

std::size_t Table::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw ParseError(1, "no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header_.begin());
}

bool Table::has_column(std::string_view name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

}  // namespace sentinel::csv

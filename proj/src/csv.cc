#include "mlal/csv.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "mlal/error.h"

namespace mlal {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("number", 0, "'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << csv_field(row[i]);
  }
  out << '\n';
}

std::vector<CsvRow> read_csv(std::istream& in, const std::string& source) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  std::size_t line = 1;
  char c;
  auto end_row = [&] {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
    row.clear();
    field.clear();
    field_started = any = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError(source, line, "unexpected quote inside field");
        quoted = field_started = any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !row.empty()) end_row();
        ++line;
        break;
      default:
        field += c;
        field_started = any = true;
    }
  }
  if (quoted) throw ParseError(source, line, "unterminated quoted field");
  if (any || !row.empty()) end_row();
  return rows;
}

}  // namespace mlal

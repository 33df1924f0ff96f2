#ifndef MLAL_CSV_H_
#define MLAL_CSV_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mlal {

using CsvRow = std::vector<std::string>;

// Shortest representation that parses back to the same double; "inf",
// "-inf" and "nan" for non-finite values.
std::string format_double(double value);
double parse_double(std::string_view text);  // throws ParseError

// RFC 4180 quoting where needed.
std::string csv_field(std::string_view field);
void write_csv_row(std::ostream& out, const CsvRow& row);

// Reads all rows, honouring quoted fields (embedded commas, quotes, newlines).
std::vector<CsvRow> read_csv(std::istream& in, const std::string& source);

}  // namespace mlal

#endif  // MLAL_CSV_H_

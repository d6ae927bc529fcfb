#ifndef KBC_BASE_CSV_H_
#define KBC_BASE_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace kbc {

using CsvRow = std::vector<std::string>;

// RFC 4180: quoted fields may contain separators, doubled quotes and
// newlines. Throws ParseError on an unterminated quote.
std::vector<CsvRow> ParseCsv(std::string_view text);

std::string CsvEscape(std::string_view field);
std::string FormatCsvRow(const CsvRow &row);

}  // namespace kbc

#endif  // KBC_BASE_CSV_H_

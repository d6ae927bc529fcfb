#include "kbc/base/jsonl.h"

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"

namespace kbc {

std::vector<Json> ParseJsonl(const std::string &text) {
  std::vector<Json> rows;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = Trim(std::string_view(text).substr(start, end - start));
    if (!line.empty()) {
      try {
        rows.push_back(Json::parse(line));
      } catch (const Json::parse_error &e) {
        throw ParseError(std::string("bad JSON line: ") + e.what(), start);
      }
    }
    start = end + 1;
  }
  return rows;
}

std::vector<Json> ReadJsonl(const std::string &path) {
  return ParseJsonl(ReadFile(path));
}

std::string DumpJsonl(const std::vector<Json> &rows) {
  std::string out;
  for (const Json &row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

void WriteJsonl(const std::string &path, const std::vector<Json> &rows) {
  WriteFile(path, DumpJsonl(rows));
}

}  // namespace kbc

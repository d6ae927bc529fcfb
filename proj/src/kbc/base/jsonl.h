#ifndef KBC_BASE_JSONL_H_
#define KBC_BASE_JSONL_H_

#include <string>
#include <vector>

#include "json.hpp"

namespace kbc {

using Json = nlohmann::json;

// One JSON object per non-blank line. Throws ParseError with the byte
// offset of the offending line.
std::vector<Json> ReadJsonl(const std::string &path);
std::vector<Json> ParseJsonl(const std::string &text);

std::string DumpJsonl(const std::vector<Json> &rows);
void WriteJsonl(const std::string &path, const std::vector<Json> &rows);

}  // namespace kbc

#endif  // KBC_BASE_JSONL_H_

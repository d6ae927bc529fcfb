#ifndef KBC_BASE_STRINGS_H_
#define KBC_BASE_STRINGS_H_

#include <string>
#include <string_view>
#include <vector>

namespace kbc {

std::string ToLower(std::string_view s);
std::string Trim(std::string_view s);
std::vector<std::string> Split(std::string_view s, char sep);
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Collapses every run of ASCII whitespace into one space and trims.
std::string NormalizeWhitespace(std::string_view s);

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
size_t FindInvalidUtf8(std::string_view s);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace kbc

#endif  // KBC_BASE_STRINGS_H_

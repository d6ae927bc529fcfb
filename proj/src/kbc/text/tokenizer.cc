#include "kbc/text/tokenizer.h"

#include <cctype>
#include <regex>

namespace kbc::text {
namespace {

bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsAlpha(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool IsAlnum(char c) { return IsDigit(c) || IsAlpha(c); }
bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

size_t Utf8Length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

// Alphanumeric run with internal '-' / '\'' / '.' joining alnum chars.
size_t ScanWord(std::string_view s, size_t i) {
  while (i < s.size()) {
    if (IsAlnum(s[i])) {
      ++i;
    } else if ((s[i] == '-' || s[i] == '\'') && i + 1 < s.size() &&
               IsAlpha(s[i + 1]) && i > 0 && IsAlnum(s[i - 1])) {
      ++i;
    } else if (s[i] == '.' && i + 1 < s.size() && IsAlpha(s[i + 1]) &&
               i > 0 && IsAlpha(s[i - 1])) {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

size_t ScanDigits(std::string_view s, size_t i) {
  while (i < s.size() && IsDigit(s[i])) ++i;
  return i;
}

}  // namespace

bool IsNumericToken(std::string_view token) {
  static const std::regex kDecimal(R"([+-]?[0-9]+(\.[0-9]+)?)");
  return std::regex_match(token.begin(), token.end(), kDecimal);
}

std::vector<TokenSpan> Tokenize(std::string_view s) {
  std::vector<TokenSpan> spans;
  size_t i = 0;
  while (i < s.size()) {
    if (IsSpace(s[i])) {
      ++i;
      continue;
    }
    size_t start = i;
    bool prev_boundary = start == 0 || IsSpace(s[start - 1]) ||
                         std::string_view("([{=/:;,").find(s[start - 1]) !=
                             std::string_view::npos;
    bool signed_number = (s[i] == '+' || s[i] == '-') && prev_boundary &&
                         i + 1 < s.size() && IsDigit(s[i + 1]);
    size_t end;
    if (IsDigit(s[i]) || signed_number) {
      end = ScanDigits(s, signed_number ? i + 1 : i);
      if (end + 1 < s.size() && s[end] == '.' && IsDigit(s[end + 1])) {
        end = ScanDigits(s, end + 1);
      }
      if (end < s.size() && IsAlpha(s[end])) {
        // Mixed token such as "5q" or "2R01LM": a word, not a number.
        end = ScanWord(s, end);
      } else {
        while (end + 3 < s.size() && s[end] == ',' &&
               IsDigit(s[end + 1]) && IsDigit(s[end + 2]) &&
               IsDigit(s[end + 3]) &&
               (end + 4 >= s.size() || !IsDigit(s[end + 4]))) {
          end += 4;
        }
        if (end < s.size() && s[end] == '%') ++end;
      }
    } else if (IsAlpha(s[i])) {
      end = ScanWord(s, i);
    } else {
      end = i + Utf8Length(static_cast<unsigned char>(s[i]));
      if (end > s.size()) end = s.size();
    }
    TokenSpan span;
    span.token = std::string(s.substr(start, end - start));
    span.start = start;
    span.end = end;
    span.is_numeric = IsNumericToken(span.token);
    spans.push_back(std::move(span));
    i = end;
  }
  return spans;
}

}  // namespace kbc::text

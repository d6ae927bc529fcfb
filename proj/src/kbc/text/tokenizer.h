#ifndef KBC_TEXT_TOKENIZER_H_
#define KBC_TEXT_TOKENIZER_H_

#include <string_view>
#include <vector>

#include "kbc/text/document.h"

namespace kbc::text {

// True iff `token` is a plain decimal literal with at most one leading
// sign: "3.39", "12330", "-0.5". Percentages and thousands separators
// do not qualify.
bool IsNumericToken(std::string_view token);

// Splits sentence text into ordered, non-overlapping spans.
//
//  * numbers keep their decimal point and an attached '%' ("0.30%" is one
//    token); a sign is attached only at the start of a token,
//  * "5.43-25.61" yields "5.43", "-", "25.61",
//  * alphanumeric words keep internal hyphens and apostrophes
//    ("CDKN2A", "early-onset"),
//  * every other non-space code point is its own token.
std::vector<TokenSpan> Tokenize(std::string_view text);

}  // namespace kbc::text

#endif  // KBC_TEXT_TOKENIZER_H_

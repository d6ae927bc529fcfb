#ifndef KBC_TEXT_SEGMENTER_H_
#define KBC_TEXT_SEGMENTER_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kbc/text/document.h"

namespace kbc::text {

// Words (lowercase, without the trailing period) that never end a sentence.
const std::set<std::string> &DefaultAbbreviations();

// Rule-based splitter. Blank lines are hard boundaries; otherwise a
// sentence ends at '.', '!' or '?' (plus closing brackets/quotes) followed
// by whitespace and a capital, digit or opening bracket, unless the word
// before the period is a known abbreviation.
std::vector<std::string> SplitSentences(
    std::string_view text,
    const std::set<std::string> &abbreviations = DefaultAbbreviations());

// Segments every non-excluded section in reading order. sent_id is dense
// from zero across the document; every span satisfies
// text.substr(start, end - start) == token.
std::vector<TokenizedSentence> SegmentAndTokenize(const Document &doc);

// Tokenizes a standalone sentence (used for snippets and queries).
TokenizedSentence MakeSentence(const std::string &pmid, int sent_id,
                               std::string text, std::string section = "");

}  // namespace kbc::text

#endif  // KBC_TEXT_SEGMENTER_H_

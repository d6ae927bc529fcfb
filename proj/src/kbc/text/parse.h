#ifndef KBC_TEXT_PARSE_H_
#define KBC_TEXT_PARSE_H_

#include <set>
#include <string>
#include <string_view>

#include "kbc/text/document.h"

namespace kbc::text {

// Element names (namespace prefixes ignored) that drive extraction from
// converter-produced TEI-style XML.
struct XmlSchema {
  std::set<std::string> paragraph_tags = {"p"};
  std::set<std::string> section_tags = {"div"};
  std::set<std::string> heading_tags = {"head"};
  std::set<std::string> abstract_tags = {"abstract"};
  std::set<std::string> dropped_tags = {"figure", "table", "figDesc",
                                        "listBibl", "formula"};
  // Section titles (lowercase) that mark a section as an abstract.
  std::set<std::string> abstract_titles = {"abstract", "summary"};
};

// Parses one article. Abstract sections are kept with excluded=true.
//
// XML: text is collected from paragraph elements only; dropped elements and
// everything inside them are skipped. Text: lines of the form "# Title"
// open a new section.
//
// Throws ParseError (invalid UTF-8 or malformed XML, with byte offset) and
// EmptyDocument when no non-excluded section carries text.
Document ParseDocument(std::string_view raw, SourceFormat format,
                       const std::string &pmid,
                       const XmlSchema &schema = XmlSchema());

}  // namespace kbc::text

#endif  // KBC_TEXT_PARSE_H_

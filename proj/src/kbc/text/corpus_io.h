#ifndef KBC_TEXT_CORPUS_IO_H_
#define KBC_TEXT_CORPUS_IO_H_

#include <string>
#include <vector>

#include "kbc/base/jsonl.h"
#include "kbc/text/document.h"
#include "kbc/text/parse.h"

namespace kbc::text {

// Reads a manifest of {"pmid", "path", "format"} lines. Relative paths
// resolve against the manifest's directory. Unreadable or unparsable
// records are collected in Corpus::errors(); a duplicate pmid throws
// ConfigError.
Corpus LoadCorpus(const std::string &manifest_path,
                  const XmlSchema &schema = XmlSchema());

Json DocumentToJson(const Document &doc);
Document DocumentFromJson(const Json &j);

Json SentenceToJson(const TokenizedSentence &s);
TokenizedSentence SentenceFromJson(const Json &j);

}  // namespace kbc::text

#endif  // KBC_TEXT_CORPUS_IO_H_

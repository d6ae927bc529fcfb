#include "kbc/text/document.h"

#include "kbc/base/errors.h"

namespace kbc::text {

SourceFormat ParseSourceFormat(const std::string &name) {
  if (name == "xml") return SourceFormat::kXml;
  if (name == "text") return SourceFormat::kText;
  throw ConfigError("unknown document format '" + name + "'");
}

const char *SourceFormatName(SourceFormat format) {
  return format == SourceFormat::kXml ? "xml" : "text";
}

void Corpus::Add(Document doc) {
  if (doc.pmid.empty()) throw ConfigError("document without pmid");
  if (index_.count(doc.pmid)) {
    throw ConfigError("duplicate pmid " + doc.pmid);
  }
  index_[doc.pmid] = documents_.size();
  documents_.push_back(std::move(doc));
}

const Document *Corpus::Find(const std::string &pmid) const {
  auto it = index_.find(pmid);
  return it == index_.end() ? nullptr : &documents_[it->second];
}

}  // namespace kbc::text

#ifndef KBC_TEXT_DOCUMENT_H_
#define KBC_TEXT_DOCUMENT_H_

#include <map>
#include <string>
#include <vector>

namespace kbc::text {

enum class SourceFormat { kXml, kText };

SourceFormat ParseSourceFormat(const std::string &name);
const char *SourceFormatName(SourceFormat format);

struct Section {
  std::string title;
  std::string text;
  // Abstract sections are kept but never segmented.
  bool excluded = false;
};

struct Document {
  std::string pmid;
  std::vector<Section> sections;
  SourceFormat source_format = SourceFormat::kXml;
};

struct TokenSpan {
  std::string token;
  size_t start = 0;
  size_t end = 0;
  bool is_numeric = false;
};

struct Sentence {
  std::string pmid;
  int sent_id = 0;
  std::string text;
  std::string section;
};

struct TokenizedSentence {
  Sentence sentence;
  std::vector<TokenSpan> tokens;
};

struct LoadError {
  std::string pmid;
  std::string path;
  std::string message;
};

// Documents in manifest order plus the per-record failures.
class Corpus {
 public:
  // Throws ConfigError on a duplicate pmid.
  void Add(Document doc);

  const std::vector<Document> &documents() const { return documents_; }
  const Document *Find(const std::string &pmid) const;
  size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  std::vector<LoadError> &errors() { return errors_; }
  const std::vector<LoadError> &errors() const { return errors_; }

 private:
  std::vector<Document> documents_;
  std::map<std::string, size_t> index_;
  std::vector<LoadError> errors_;
};

}  // namespace kbc::text

#endif  // KBC_TEXT_DOCUMENT_H_

#include "kbc/text/parse.h"

#include <expat.h>

#include <memory>
#include <vector>

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"

namespace kbc::text {
namespace {

std::string LocalName(const XML_Char *name) {
  std::string s(name);
  size_t colon = s.rfind(':');
  return colon == std::string::npos ? s : s.substr(colon + 1);
}

class TeiReader {
 public:
  explicit TeiReader(const XmlSchema &schema) : schema_(schema) {}

  std::vector<Section> Read(std::string_view raw) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    XML_SetUserData(parser.get(), this);
    XML_SetElementHandler(parser.get(), &TeiReader::OnStart, &TeiReader::OnEnd);
    XML_SetCharacterDataHandler(parser.get(), &TeiReader::OnText);
    if (XML_Parse(parser.get(), raw.data(), static_cast<int>(raw.size()),
                  XML_TRUE) == XML_STATUS_ERROR) {
      auto offset = XML_GetCurrentByteIndex(parser.get());
      throw ParseError(std::string("malformed XML: ") +
                           XML_ErrorString(XML_GetErrorCode(parser.get())),
                       offset < 0 ? 0 : static_cast<size_t>(offset));
    }
    return std::move(sections_);
  }

 private:
  static void OnStart(void *self, const XML_Char *name, const XML_Char **) {
    static_cast<TeiReader *>(self)->Start(LocalName(name));
  }
  static void OnEnd(void *self, const XML_Char *name) {
    static_cast<TeiReader *>(self)->End(LocalName(name));
  }
  static void OnText(void *self, const XML_Char *s, int len) {
    static_cast<TeiReader *>(self)->Text(std::string_view(s, static_cast<size_t>(len)));
  }

  void Start(const std::string &tag) {
    if (drop_depth_ > 0 || schema_.dropped_tags.count(tag)) {
      ++drop_depth_;
      return;
    }
    if (schema_.abstract_tags.count(tag)) ++abstract_depth_;
    if (schema_.section_tags.count(tag)) {
      open_.push_back(NewSection("", abstract_depth_ > 0));
    } else if (schema_.heading_tags.count(tag)) {
      ++heading_depth_;
    } else if (schema_.paragraph_tags.count(tag)) {
      ++paragraph_depth_;
    }
  }

  void End(const std::string &tag) {
    if (drop_depth_ > 0) {
      --drop_depth_;
      return;
    }
    if (schema_.section_tags.count(tag)) {
      if (!open_.empty()) open_.pop_back();
    } else if (schema_.heading_tags.count(tag)) {
      if (--heading_depth_ == 0) SetHeading();
    } else if (schema_.paragraph_tags.count(tag)) {
      if (--paragraph_depth_ == 0) FlushParagraph();
    }
    if (schema_.abstract_tags.count(tag)) --abstract_depth_;
  }

  void Text(std::string_view s) {
    if (drop_depth_ > 0) return;
    if (heading_depth_ > 0) {
      heading_.append(s);
    } else if (paragraph_depth_ > 0) {
      paragraph_.append(s);
    }
  }

  size_t NewSection(std::string title, bool excluded) {
    Section section;
    section.title = std::move(title);
    section.excluded = excluded || IsAbstractTitle(section.title);
    sections_.push_back(std::move(section));
    return sections_.size() - 1;
  }

  bool IsAbstractTitle(const std::string &title) const {
    return schema_.abstract_titles.count(ToLower(Trim(title))) > 0;
  }

  // The section receiving text; reopens a continuation when a nested
  // section closed in between, so reading order is preserved.
  Section &Current() {
    if (open_.empty()) {
      if (sections_.empty() || !implicit_open_ ||
          sections_.back().excluded != (abstract_depth_ > 0)) {
        NewSection(abstract_depth_ > 0 ? "Abstract" : "", abstract_depth_ > 0);
        implicit_open_ = true;
      }
      return sections_.back();
    }
    implicit_open_ = false;
    size_t idx = open_.back();
    if (idx != sections_.size() - 1) {
      Section cont;
      cont.title = sections_[idx].title;
      cont.excluded = sections_[idx].excluded;
      sections_.push_back(std::move(cont));
      open_.back() = sections_.size() - 1;
    }
    return sections_.back();
  }

  void SetHeading() {
    std::string title = NormalizeWhitespace(heading_);
    heading_.clear();
    Section &section = Current();
    if (section.text.empty()) {
      section.title = title;
      section.excluded = section.excluded || IsAbstractTitle(title);
    } else {
      bool excluded = section.excluded;
      size_t idx = NewSection(title, excluded);
      if (!open_.empty()) open_.back() = idx;
    }
  }

  void FlushParagraph() {
    std::string para = NormalizeWhitespace(paragraph_);
    paragraph_.clear();
    if (para.empty()) return;
    Section &section = Current();
    if (!section.text.empty()) section.text += "\n\n";
    section.text += para;
  }

  const XmlSchema &schema_;
  std::vector<Section> sections_;
  std::vector<size_t> open_;
  bool implicit_open_ = false;
  int drop_depth_ = 0;
  int abstract_depth_ = 0;
  int heading_depth_ = 0;
  int paragraph_depth_ = 0;
  std::string heading_;
  std::string paragraph_;
};

std::vector<Section> ReadPlainText(std::string_view raw,
                                   const XmlSchema &schema) {
  std::vector<Section> sections;
  sections.emplace_back();
  size_t i = 0;
  while (i <= raw.size()) {
    size_t eol = raw.find('\n', i);
    if (eol == std::string_view::npos) eol = raw.size();
    std::string_view line = raw.substr(i, eol - i);
    if (line.size() >= 2 && line[0] == '#' && line[1] == ' ') {
      Section s;
      s.title = Trim(line.substr(2));
      s.excluded = schema.abstract_titles.count(ToLower(s.title)) > 0;
      sections.push_back(std::move(s));
    } else {
      sections.back().text.append(line);
      sections.back().text.push_back('\n');
    }
    if (eol == raw.size()) break;
    i = eol + 1;
  }
  for (Section &s : sections) s.text = Trim(s.text);
  return sections;
}

}  // namespace

Document ParseDocument(std::string_view raw, SourceFormat format,
                       const std::string &pmid, const XmlSchema &schema) {
  size_t bad = FindInvalidUtf8(raw);
  if (bad != std::string_view::npos) {
    throw ParseError("input is not valid UTF-8", bad);
  }
  Document doc;
  doc.pmid = pmid;
  doc.source_format = format;
  std::vector<Section> sections = format == SourceFormat::kXml
                                      ? TeiReader(schema).Read(raw)
                                      : ReadPlainText(raw, schema);
  bool has_body = false;
  for (Section &s : sections) {
    if (Trim(s.text).empty() && s.title.empty()) continue;
    if (!s.excluded && !Trim(s.text).empty()) has_body = true;
    doc.sections.push_back(std::move(s));
  }
  if (!has_body) throw EmptyDocument("document " + pmid + " has no body text");
  return doc;
}

}  // namespace kbc::text

#include "kbc/text/segmenter.h"

#include <cctype>

#include "kbc/base/strings.h"
#include "kbc/text/tokenizer.h"

namespace kbc::text {
namespace {

std::vector<std::string> SplitParagraphs(std::string_view text) {
  std::vector<std::string> paragraphs;
  std::string current;
  size_t i = 0;
  while (i < text.size()) {
    size_t eol = text.find('\n', i);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(i, eol - i);
    if (Trim(line).empty()) {
      if (!Trim(current).empty()) paragraphs.push_back(current);
      current.clear();
    } else {
      current.append(line);
      current.push_back('\n');
    }
    i = eol + 1;
  }
  if (!Trim(current).empty()) paragraphs.push_back(current);
  return paragraphs;
}

bool IsCloser(char c) {
  return c == ')' || c == ']' || c == '"' || c == '\'';
}

bool StartsSentence(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isupper(u) || std::isdigit(u) || c == '(' || c == '[' ||
         c == '"' || u >= 0x80;
}

std::string WordBefore(const std::string &s, size_t period) {
  size_t b = period;
  while (b > 0 && !std::isspace(static_cast<unsigned char>(s[b - 1])) &&
         s[b - 1] != '(') {
    --b;
  }
  return ToLower(s.substr(b, period - b));
}

}  // namespace

const std::set<std::string> &DefaultAbbreviations() {
  static const std::set<std::string> kAbbrev = {
      "al", "vs", "fig", "figs", "e.g", "i.e", "eq", "eqs", "ref", "refs",
      "no", "approx", "dr", "cf", "ca", "resp", "vol", "pp", "tab", "suppl"};
  return kAbbrev;
}

std::vector<std::string> SplitSentences(
    std::string_view text, const std::set<std::string> &abbreviations) {
  std::vector<std::string> sentences;
  for (const std::string &raw : SplitParagraphs(text)) {
    std::string para = NormalizeWhitespace(raw);
    size_t begin = 0;
    for (size_t i = 0; i < para.size(); ++i) {
      char c = para[i];
      if (c != '.' && c != '!' && c != '?') continue;
      size_t end = i + 1;
      while (end < para.size() && IsCloser(para[end])) ++end;
      if (end >= para.size()) break;
      if (para[end] != ' ' || end + 1 >= para.size()) continue;
      if (!StartsSentence(para[end + 1])) continue;
      if (c == '.' && abbreviations.count(WordBefore(para, i))) continue;
      std::string sentence = Trim(std::string_view(para).substr(begin, end - begin));
      if (!sentence.empty()) sentences.push_back(std::move(sentence));
      begin = end + 1;
      i = end;
    }
    std::string tail = Trim(std::string_view(para).substr(begin));
    if (!tail.empty()) sentences.push_back(std::move(tail));
  }
  return sentences;
}

TokenizedSentence MakeSentence(const std::string &pmid, int sent_id,
                               std::string text, std::string section) {
  TokenizedSentence out;
  out.sentence.pmid = pmid;
  out.sentence.sent_id = sent_id;
  out.sentence.text = std::move(text);
  out.sentence.section = std::move(section);
  out.tokens = Tokenize(out.sentence.text);
  return out;
}

std::vector<TokenizedSentence> SegmentAndTokenize(const Document &doc) {
  std::vector<TokenizedSentence> out;
  int next_id = 0;
  for (const Section &section : doc.sections) {
    if (section.excluded) continue;
    for (std::string &s : SplitSentences(section.text)) {
      out.push_back(MakeSentence(doc.pmid, next_id++, std::move(s), section.title));
    }
  }
  return out;
}

}  // namespace kbc::text

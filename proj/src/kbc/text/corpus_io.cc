#include "kbc/text/corpus_io.h"

#include <filesystem>
#include <set>

#include "kbc/base/errors.h"
#include "kbc/base/strings.h"
#include "kbc/text/segmenter.h"
#include "kbc/text/tokenizer.h"

namespace kbc::text {

Corpus LoadCorpus(const std::string &manifest_path, const XmlSchema &schema) {
  namespace fs = std::filesystem;
  fs::path base = fs::path(manifest_path).parent_path();
  Corpus corpus;
  std::set<std::string> seen;
  for (const Json &rec : ReadJsonl(manifest_path)) {
    std::string pmid = rec.at("pmid").get<std::string>();
    std::string path = rec.at("path").get<std::string>();
    SourceFormat format = ParseSourceFormat(rec.value("format", "xml"));
    if (!seen.insert(pmid).second) {
      throw ConfigError("duplicate pmid " + pmid + " in " + manifest_path);
    }
    fs::path full = fs::path(path).is_absolute() ? fs::path(path) : base / path;
    try {
      corpus.Add(ParseDocument(ReadFile(full.string()), format, pmid, schema));
    } catch (const ConfigError &) {
      throw;
    } catch (const Error &e) {
      corpus.errors().push_back({pmid, full.string(), e.what()});
    }
  }
  return corpus;
}

Json DocumentToJson(const Document &doc) {
  Json sections = Json::array();
  for (const Section &s : doc.sections) {
    sections.push_back({{"title", s.title}, {"text", s.text}, {"excluded", s.excluded}});
  }
  return {{"pmid", doc.pmid},
          {"format", SourceFormatName(doc.source_format)},
          {"sections", sections}};
}

Document DocumentFromJson(const Json &j) {
  Document doc;
  doc.pmid = j.at("pmid").get<std::string>();
  doc.source_format = ParseSourceFormat(j.value("format", "xml"));
  for (const Json &s : j.at("sections")) {
    doc.sections.push_back({s.at("title").get<std::string>(),
                            s.at("text").get<std::string>(),
                            s.value("excluded", false)});
  }
  return doc;
}

Json SentenceToJson(const TokenizedSentence &s) {
  Json tokens = Json::array();
  for (const TokenSpan &t : s.tokens) {
    tokens.push_back({{"token", t.token}, {"start", t.start}, {"end", t.end},
                      {"is_numeric", t.is_numeric}});
  }
  return {{"pmid", s.sentence.pmid},
          {"sent_id", s.sentence.sent_id},
          {"section", s.sentence.section},
          {"text", s.sentence.text},
          {"tokens", tokens}};
}

TokenizedSentence SentenceFromJson(const Json &j) {
  TokenizedSentence s = MakeSentence(j.at("pmid").get<std::string>(),
                                     j.at("sent_id").get<int>(),
                                     j.at("text").get<std::string>(),
                                     j.value("section", ""));
  return s;
}

}  // namespace kbc::text
